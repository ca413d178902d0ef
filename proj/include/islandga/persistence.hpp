#ifndef ISLANDGA_PERSISTENCE_HPP
#define ISLANDGA_PERSISTENCE_HPP

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "islandga/core.hpp"
#include "islandga/errors.hpp"
#include "islandga/pipeline.hpp"

/// Portable on-disk formats: population snapshots, termination flags,
/// solution partitions and run reports.
///
/// All binary formats are canonical — fixed field order, explicit lengths,
/// little-endian integers, fitness stored as its raw IEEE-754 bit pattern —
/// so that two equal snapshots produce byte-identical files and round-trips
/// are bit-exact. Format version 1.
///
/// Snapshot layout:
///   magic "ISLGAPOP" | u32 version | u32 islands | u32 island_size
///   | u32 genome_length | u64 generation | u64 master_seed
///   | per island: u32 count, count individual records
/// Individual record:
///   ceil(m/8) genome bytes (bit i at byte i/8, LSB first; padding bits 0)
///   | u8 has_fitness | [u64 fitness bits] | u8 is_solution
namespace islandga {

inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr char kSnapshotMagic[8] = {'I', 'S', 'L', 'G', 'A', 'P', 'O', 'P'};
inline constexpr char kFlagMagic[8] = {'I', 'S', 'L', 'G', 'A', 'F', 'L', 'G'};
inline constexpr char kListMagic[8] = {'I', 'S', 'L', 'G', 'A', 'L', 'S', 'T'};

namespace detail {

class ByteWriter {
public:
    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void magic(const char (&m)[8]) {
        for (char c : m) bytes_.push_back(static_cast<std::uint8_t>(c));
    }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint64_t offset() const { return offset_; }

    std::uint8_t u8() {
        need(1, "u8");
        return bytes_[offset_++];
    }
    std::uint32_t u32() {
        need(4, "u32");
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes_[offset_ + i]} << (8 * i);
        offset_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8, "u64");
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes_[offset_ + i]} << (8 * i);
        offset_ += 8;
        return v;
    }
    void expect_magic(const char (&m)[8], const char* format_name) {
        need(8, "magic");
        for (int i = 0; i < 8; ++i) {
            if (bytes_[offset_ + i] != static_cast<std::uint8_t>(m[i]))
                throw ParseError::at_offset(offset_, std::string("bad magic, not a ") +
                                                         format_name + " file");
        }
        offset_ += 8;
    }
    std::span<const std::uint8_t> raw(std::size_t n, const char* what) {
        need(n, what);
        auto s = bytes_.subspan(offset_, n);
        offset_ += n;
        return s;
    }
    void expect_end() {
        if (offset_ != bytes_.size())
            throw ParseError::at_offset(offset_, "trailing bytes after last record");
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError::at_offset(offset_, what);
    }

private:
    void need(std::size_t n, const char* what) const {
        if (offset_ + n > bytes_.size())
            throw ParseError::at_offset(offset_,
                                        std::string("file truncated while reading ") + what);
    }
    std::span<const std::uint8_t> bytes_;
    std::uint64_t offset_ = 0;
};

inline void write_individual(ByteWriter& w, const Individual& ind, std::size_t genome_length) {
    const std::size_t packed = (genome_length + 7) / 8;
    std::vector<std::uint8_t> bytes(packed, 0);
    for (std::size_t i = 0; i < genome_length; ++i) {
        if (ind.genome.bit(i)) bytes[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    }
    for (std::uint8_t b : bytes) w.u8(b);
    w.u8(ind.fitness ? 1 : 0);
    if (ind.fitness) w.u64(std::bit_cast<std::uint64_t>(*ind.fitness));
    w.u8(ind.is_solution ? 1 : 0);
}

inline Individual read_individual(ByteReader& r, std::size_t genome_length) {
    const std::size_t packed = (genome_length + 7) / 8;
    const std::uint64_t genome_offset = r.offset();
    auto bytes = r.raw(packed, "genome");
    std::vector<std::uint8_t> bits(genome_length);
    for (std::size_t i = 0; i < genome_length; ++i)
        bits[i] = (bytes[i / 8] >> (i % 8)) & 1u;
    // Canonical form: padding bits beyond the genome length must be zero.
    for (std::size_t i = genome_length; i < packed * 8; ++i) {
        if ((bytes[i / 8] >> (i % 8)) & 1u)
            throw ParseError::at_offset(genome_offset + i / 8, "nonzero genome padding bits");
    }
    Individual ind{Genome(std::move(bits)), std::nullopt, false};
    const std::uint8_t has_fitness = r.u8();
    if (has_fitness > 1) r.fail("has_fitness flag must be 0 or 1");
    if (has_fitness) {
        const double fitness = std::bit_cast<double>(r.u64());
        if (std::isnan(fitness) || fitness < 0.0) r.fail("fitness must be a non-negative number");
        ind.fitness = fitness;
    }
    const std::uint8_t is_solution = r.u8();
    if (is_solution > 1) r.fail("is_solution flag must be 0 or 1");
    if (is_solution && !ind.fitness) r.fail("is_solution requires a fitness value");
    ind.is_solution = is_solution != 0;
    return ind;
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write file: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed: " + path.string());
}

} // namespace detail

/// Validates the snapshot invariants and returns (island_size, genome_length).
inline std::pair<std::uint32_t, std::uint32_t> snapshot_shape(const PopulationSnapshot& s) {
    if (s.islands.empty()) throw ContractError("snapshot must contain at least one island");
    const std::size_t island_size = s.islands.front().size();
    if (island_size == 0) throw ContractError("snapshot islands must not be empty");
    std::size_t genome_length = 0;
    for (const auto& island : s.islands) {
        if (island.size() != island_size)
            throw ContractError("snapshot islands must all have the same size");
        for (const auto& ind : island) {
            if (genome_length == 0) genome_length = ind.genome.size();
            if (ind.genome.size() != genome_length || genome_length == 0)
                throw ContractError("snapshot genomes must share one positive length");
            if (ind.fitness && (*ind.fitness < 0.0 || std::isnan(*ind.fitness)))
                throw ContractError("snapshot fitness values must be non-negative");
            if (ind.is_solution && !ind.fitness)
                throw ContractError("is_solution requires a fitness value");
        }
    }
    return {static_cast<std::uint32_t>(island_size), static_cast<std::uint32_t>(genome_length)};
}

inline std::vector<std::uint8_t> serialize_snapshot(const PopulationSnapshot& snapshot,
                                                    std::uint64_t master_seed) {
    const auto [island_size, genome_length] = snapshot_shape(snapshot);
    detail::ByteWriter w;
    w.magic(kSnapshotMagic);
    w.u32(kFormatVersion);
    w.u32(static_cast<std::uint32_t>(snapshot.islands.size()));
    w.u32(island_size);
    w.u32(genome_length);
    w.u64(snapshot.generation);
    w.u64(master_seed);
    for (const auto& island : snapshot.islands) {
        w.u32(static_cast<std::uint32_t>(island.size()));
        for (const auto& ind : island) detail::write_individual(w, ind, genome_length);
    }
    return w.take();
}

inline PopulationSnapshot parse_snapshot(std::span<const std::uint8_t> bytes,
                                         std::uint64_t* master_seed_out = nullptr) {
    detail::ByteReader r(bytes);
    r.expect_magic(kSnapshotMagic, "snapshot");
    const std::uint32_t version = r.u32();
    if (version != kFormatVersion)
        r.fail("unsupported format version " + std::to_string(version));
    const std::uint32_t num_islands = r.u32();
    const std::uint32_t island_size = r.u32();
    const std::uint32_t genome_length = r.u32();
    if (num_islands == 0) r.fail("snapshot must contain at least one island");
    if (island_size == 0) r.fail("island size must be >= 1");
    if (genome_length == 0) r.fail("genome length must be >= 1");
    PopulationSnapshot snapshot;
    snapshot.generation = r.u64();
    const std::uint64_t master_seed = r.u64();
    if (master_seed_out) *master_seed_out = master_seed;
    snapshot.islands.resize(num_islands);
    for (std::uint32_t i = 0; i < num_islands; ++i) {
        const std::uint32_t count = r.u32();
        if (count != island_size)
            r.fail("island " + std::to_string(i) + " has " + std::to_string(count) +
                   " individuals, header says " + std::to_string(island_size));
        snapshot.islands[i].reserve(count);
        for (std::uint32_t j = 0; j < count; ++j)
            snapshot.islands[i].push_back(detail::read_individual(r, genome_length));
    }
    r.expect_end();
    return snapshot;
}

inline void write_snapshot(const std::filesystem::path& path, const PopulationSnapshot& snapshot,
                           std::uint64_t master_seed) {
    const auto bytes = serialize_snapshot(snapshot, master_seed);
    detail::write_file(path, bytes);
}

inline PopulationSnapshot read_snapshot(const std::filesystem::path& path,
                                        std::uint64_t* master_seed_out = nullptr) {
    const auto bytes = detail::read_file(path);
    return parse_snapshot(bytes, master_seed_out);
}

/// Flat list of individuals (solutions / non-solutions files). May be empty.
inline std::vector<std::uint8_t> serialize_individual_list(std::span<const Individual> list,
                                                           std::uint32_t genome_length) {
    detail::ByteWriter w;
    w.magic(kListMagic);
    w.u32(kFormatVersion);
    w.u32(genome_length);
    w.u64(list.size());
    for (const auto& ind : list) {
        if (ind.genome.size() != genome_length)
            throw ContractError("individual genome length does not match list header");
        detail::write_individual(w, ind, genome_length);
    }
    return w.take();
}

inline std::vector<Individual> parse_individual_list(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r(bytes);
    r.expect_magic(kListMagic, "individual list");
    const std::uint32_t version = r.u32();
    if (version != kFormatVersion)
        r.fail("unsupported format version " + std::to_string(version));
    const std::uint32_t genome_length = r.u32();
    const std::uint64_t count = r.u64();
    std::vector<Individual> out;
    out.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i)
        out.push_back(detail::read_individual(r, genome_length));
    r.expect_end();
    return out;
}

inline void write_individual_list(const std::filesystem::path& path,
                                  std::span<const Individual> list,
                                  std::uint32_t genome_length) {
    detail::write_file(path, serialize_individual_list(list, genome_length));
}

inline std::vector<Individual> read_individual_list(const std::filesystem::path& path) {
    return parse_individual_list(detail::read_file(path));
}

/// Termination flag file. Its presence alone signals termination; the
/// content (the satisfying individual) is diagnostic.
inline void write_flag(const std::filesystem::path& path, const TerminationFlag& flag) {
    detail::ByteWriter w;
    w.magic(kFlagMagic);
    w.u32(kFormatVersion);
    w.u32(flag.island.value);
    w.u32(static_cast<std::uint32_t>(flag.satisfying_individual.genome.size()));
    w.u64(flag.generation);
    detail::write_individual(w, flag.satisfying_individual,
                             flag.satisfying_individual.genome.size());
    const auto bytes = w.take();
    detail::write_file(path, bytes);
}

inline TerminationFlag read_flag(const std::filesystem::path& path) {
    const auto bytes = detail::read_file(path);
    detail::ByteReader r(bytes);
    r.expect_magic(kFlagMagic, "flag");
    const std::uint32_t version = r.u32();
    if (version != kFormatVersion)
        r.fail("unsupported format version " + std::to_string(version));
    TerminationFlag flag;
    flag.island.value = r.u32();
    const std::uint32_t genome_length = r.u32();
    if (genome_length == 0) r.fail("genome length must be >= 1");
    flag.generation = r.u64();
    flag.satisfying_individual = detail::read_individual(r, genome_length);
    r.expect_end();
    return flag;
}

/// Run directory layout:
///   generations/gen-%06d.pop
///   flags/gen-%06d-island-%03d.flag
///   solutions.pop, non_solutions.pop, report.txt
class RunPaths {
public:
    explicit RunPaths(std::filesystem::path root) : root_(std::move(root)) {}

    const std::filesystem::path& root() const { return root_; }
    std::filesystem::path generations_dir() const { return root_ / "generations"; }
    std::filesystem::path flags_dir() const { return root_ / "flags"; }
    std::filesystem::path solutions() const { return root_ / "solutions.pop"; }
    std::filesystem::path non_solutions() const { return root_ / "non_solutions.pop"; }
    std::filesystem::path report() const { return root_ / "report.txt"; }

    std::filesystem::path snapshot(std::uint64_t generation) const {
        char name[32];
        std::snprintf(name, sizeof name, "gen-%06llu.pop",
                      static_cast<unsigned long long>(generation));
        return generations_dir() / name;
    }

    std::filesystem::path flag(std::uint64_t generation, std::uint32_t island) const {
        char name[48];
        std::snprintf(name, sizeof name, "gen-%06llu-island-%03u.flag",
                      static_cast<unsigned long long>(generation), island);
        return flags_dir() / name;
    }

    void ensure_layout() const {
        std::filesystem::create_directories(generations_dir());
        std::filesystem::create_directories(flags_dir());
    }

    /// Persisted generations, ascending.
    std::vector<std::pair<std::uint64_t, std::filesystem::path>> list_snapshots() const {
        std::vector<std::pair<std::uint64_t, std::filesystem::path>> out;
        if (!std::filesystem::is_directory(generations_dir())) return out;
        for (const auto& entry : std::filesystem::directory_iterator(generations_dir())) {
            const std::string name = entry.path().filename().string();
            unsigned long long gen = 0;
            if (std::sscanf(name.c_str(), "gen-%6llu.pop", &gen) == 1)
                out.emplace_back(gen, entry.path());
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    std::optional<std::pair<std::uint64_t, std::filesystem::path>> latest_snapshot() const {
        auto all = list_snapshots();
        if (all.empty()) return std::nullopt;
        return all.back();
    }

    /// Flags persisted for one generation, ascending island order.
    std::vector<TerminationFlag> read_flags(std::uint64_t generation) const {
        std::vector<TerminationFlag> out;
        if (!std::filesystem::is_directory(flags_dir())) return out;
        for (const auto& entry : std::filesystem::directory_iterator(flags_dir())) {
            const std::string name = entry.path().filename().string();
            unsigned long long gen = 0;
            unsigned island = 0;
            if (std::sscanf(name.c_str(), "gen-%6llu-island-%3u.flag", &gen, &island) == 2 &&
                gen == generation)
                out.push_back(read_flag(entry.path()));
        }
        std::sort(out.begin(), out.end(), [](const TerminationFlag& a, const TerminationFlag& b) {
            return a.island.value < b.island.value;
        });
        return out;
    }

private:
    std::filesystem::path root_;
};

enum class StopReason { max_generations, criterion_satisfied };

inline std::string_view to_string(StopReason reason) {
    switch (reason) {
        case StopReason::max_generations: return "max_generations";
        case StopReason::criterion_satisfied: return "criterion_satisfied";
    }
    return "unknown";
}

struct RunReport {
    std::uint64_t generations = 0;
    StopReason stop_reason = StopReason::max_generations;
    std::optional<Individual> best;
    std::filesystem::path final_snapshot;
    std::uint64_t wall_ms = 0;
};

inline std::string format_report(const RunReport& report) {
    std::string text;
    text += "generations=" + std::to_string(report.generations) + "\n";
    text += "stop_reason=" + std::string(to_string(report.stop_reason)) + "\n";
    text += "best_fitness=";
    text += report.best && report.best->fitness ? format_double(*report.best->fitness) : "-";
    text += "\n";
    text += "best_genome=";
    text += report.best ? report.best->genome.to_string() : "-";
    text += "\n";
    text += "final_snapshot=" + report.final_snapshot.string() + "\n";
    text += "wall_ms=" + std::to_string(report.wall_ms) + "\n";
    return text;
}

/// Human-readable report: one key per line, stable key order, overwrites
/// any previous report at the path.
inline void write_report(const std::filesystem::path& path, const RunReport& report) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write report: " + path.string());
    out << format_report(report);
    if (!out) throw DataError("write failed: " + path.string());
}

} // namespace islandga

#endif // ISLANDGA_PERSISTENCE_HPP
