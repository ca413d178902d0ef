#ifndef ISLANDGA_TESTS_TEST_UTIL_HPP
#define ISLANDGA_TESTS_TEST_UTIL_HPP

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "islandga/core.hpp"
#include "islandga/rng.hpp"

namespace test_util {

inline islandga::Genome genome(std::string_view bits) {
    return islandga::Genome::from_string(bits);
}

inline islandga::Individual individual(std::string_view bits,
                                       std::optional<double> fitness = std::nullopt,
                                       bool is_solution = false) {
    return islandga::Individual{genome(bits), fitness, is_solution};
}

/// Unique scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<std::uint64_t> counter{0};
        const auto n = counter.fetch_add(1);
        path_ = std::filesystem::temp_directory_path() /
                ("islandga-test-" + std::to_string(::getpid()) + "-" + std::to_string(n));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline islandga::PopulationSnapshot random_population(islandga::StreamRng& rng,
                                                      std::uint32_t islands, std::uint32_t size,
                                                      std::uint32_t genome_length,
                                                      double fitness_probability = 0.0) {
    islandga::PopulationSnapshot snapshot;
    snapshot.generation = 0;
    snapshot.islands.resize(islands);
    for (auto& island : snapshot.islands) {
        island.reserve(size);
        for (std::uint32_t i = 0; i < size; ++i) {
            std::vector<std::uint8_t> bits(genome_length);
            for (auto& b : bits) b = rng.next_bit();
            islandga::Individual ind{islandga::Genome(std::move(bits)), std::nullopt, false};
            if (rng.bernoulli(fitness_probability)) ind.fitness = rng.uniform_double() * 10.0;
            island.push_back(std::move(ind));
        }
    }
    return snapshot;
}

} // namespace test_util

#endif // ISLANDGA_TESTS_TEST_UTIL_HPP
