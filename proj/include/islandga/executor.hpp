#ifndef ISLANDGA_EXECUTOR_HPP
#define ISLANDGA_EXECUTOR_HPP

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include "islandga/errors.hpp"
#include "islandga/rng.hpp"

/// An embedded, single-process map-shuffle-reduce engine. It enforces the
/// (MAP)+(REDUCE)(MAP)* chain pattern and runs one task per split or
/// partition on a bounded worker pool. Every result is a pure function of
/// (plan, input, seeds): repeated runs are bit-identical regardless of
/// worker count or scheduling order.
namespace islandga::mr {

/// The engine's unit of data: an opaque, byte-comparable key and a value.
template <typename K, typename V>
struct Record {
    K key;
    V value;

    friend bool operator==(const Record&, const Record&) = default;
};

/// Byte serialization of keys. The serialized form drives both the default
/// partitioner hash and the deterministic ordering of key groups, so it
/// must be stable across platforms. Multi-byte integers are big-endian so
/// that lexicographic byte order equals numeric order.
template <typename K>
struct KeyTraits;

namespace detail {
template <typename T>
inline void append_uint_be(std::vector<std::uint8_t>& out, T v) {
    for (int shift = 8 * (static_cast<int>(sizeof(T)) - 1); shift >= 0; shift -= 8)
        out.push_back(static_cast<std::uint8_t>(v >> shift));
}
} // namespace detail

template <typename K>
    requires std::is_integral_v<K>
struct KeyTraits<K> {
    static void append_bytes(const K& key, std::vector<std::uint8_t>& out) {
        using U = std::make_unsigned_t<K>;
        detail::append_uint_be(out, static_cast<U>(key));
    }
};

template <>
struct KeyTraits<std::string> {
    static void append_bytes(const std::string& key, std::vector<std::uint8_t>& out) {
        out.insert(out.end(), key.begin(), key.end());
    }
};

template <typename K>
std::vector<std::uint8_t> key_bytes(const K& key) {
    std::vector<std::uint8_t> out;
    KeyTraits<K>::append_bytes(key, out);
    return out;
}

/// Default partitioner: stable 64-bit hash of the key's serialized bytes,
/// modulo the partition count. Identical keys always land on the same
/// partition, on every platform.
template <typename K>
std::size_t default_partition(const K& key, std::size_t num_partitions) {
    if (num_partitions < 1) throw ConfigError("num_partitions must be >= 1");
    const auto bytes = key_bytes(key);
    return static_cast<std::size_t>(fnv1a64(std::span<const std::uint8_t>(bytes)) %
                                    num_partitions);
}

inline unsigned resolve_workers(unsigned requested) {
    if (requested != 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

namespace detail {

/// Runs `count` index-addressed tasks on `workers` threads. Task failures
/// are captured and the failure with the lowest index is rethrown after all
/// workers finish, so error reporting does not depend on scheduling.
inline void run_indexed(std::size_t count, unsigned workers,
                        const std::function<void(std::size_t)>& body) {
    if (count == 0) return;
    workers = resolve_workers(workers);
    std::vector<std::exception_ptr> failures(count);
    if (workers <= 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) {
            try {
                body(i);
            } catch (...) {
                failures[i] = std::current_exception();
                break;
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    body(i);
                } catch (...) {
                    failures[i] = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        const unsigned n = static_cast<unsigned>(std::min<std::size_t>(workers, count));
        pool.reserve(n);
        for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (std::size_t i = 0; i < count; ++i) {
        if (failures[i]) std::rethrow_exception(failures[i]);
    }
}

inline std::string describe_current_exception() {
    try {
        throw;
    } catch (const std::exception& e) {
        return e.what();
    } catch (...) {
        return "unknown error";
    }
}

} // namespace detail

/// A map function processes one whole split (so it may buffer, e.g. to see
/// an entire island) and emits records in order. `index` identifies the
/// split (pre-maps) or partition (post-maps) being processed.
template <typename K, typename V>
using MapFn = std::function<void(std::size_t index, std::span<const Record<K, V>>, StreamRng&,
                                 std::vector<Record<K, V>>&)>;

/// A reduce function processes one key group; values arrive in
/// (source split, emission order).
template <typename K, typename V>
using ReduceFn =
    std::function<void(const K&, std::span<const V>, StreamRng&, std::vector<Record<K, V>>&)>;

template <typename K>
using PartitionFn = std::function<std::size_t(const K&, std::size_t num_partitions)>;

/// Supplies the private random stream for a (stage name, task index) pair.
using SeedFactory = std::function<StreamRng(std::string_view stage, std::size_t index)>;

/// Runs one map stage over all splits concurrently. Output i depends only
/// on (split i, seed i); a failure on any split aborts the phase naming the
/// originating split.
template <typename K, typename V>
std::vector<std::vector<Record<K, V>>> run_map_tasks(
    std::span<const std::vector<Record<K, V>>> splits, const MapFn<K, V>& map_fn,
    std::span<const std::uint64_t> seed_keys, unsigned workers = 0,
    std::string_view stage_name = "map") {
    if (seed_keys.size() != splits.size())
        throw ConfigError("run_map_tasks: seeds.length must equal splits.length");
    std::vector<std::vector<Record<K, V>>> out(splits.size());
    detail::run_indexed(splits.size(), workers, [&](std::size_t i) {
        try {
            StreamRng rng(seed_keys[i]);
            map_fn(i, std::span<const Record<K, V>>(splits[i]), rng, out[i]);
        } catch (...) {
            throw PhaseError(std::string(stage_name), i, detail::describe_current_exception());
        }
    });
    return out;
}

template <typename K, typename V>
struct KeyGroup {
    K key;
    std::vector<V> values;
};

/// Routes every record to its partition and groups values by key. Within a
/// key, values keep (source split index, emission order); within a
/// partition, groups are ordered by the keys' serialized bytes. Both orders
/// are deterministic, which is what makes downstream phases reproducible.
template <typename K, typename V>
std::vector<std::vector<KeyGroup<K, V>>> shuffle(
    std::span<const std::vector<Record<K, V>>> mapped, const PartitionFn<K>& partitioner,
    std::size_t num_partitions) {
    if (num_partitions < 1) throw ConfigError("num_partitions must be >= 1");
    std::vector<std::map<std::vector<std::uint8_t>, KeyGroup<K, V>>> buckets(num_partitions);
    for (const auto& split : mapped) {
        for (const auto& rec : split) {
            const std::size_t p = partitioner(rec.key, num_partitions) % num_partitions;
            auto bytes = key_bytes(rec.key);
            auto [it, inserted] = buckets[p].try_emplace(std::move(bytes));
            if (inserted) it->second.key = rec.key;
            it->second.values.push_back(rec.value);
        }
    }
    std::vector<std::vector<KeyGroup<K, V>>> out(num_partitions);
    for (std::size_t p = 0; p < num_partitions; ++p) {
        out[p].reserve(buckets[p].size());
        for (auto& [bytes, group] : buckets[p]) out[p].push_back(std::move(group));
    }
    return out;
}

/// One dataflow job in the shape (MAP)+(REDUCE)(MAP)*: at least one
/// pre-map, exactly one reduce, zero or more post-maps. The shape is the
/// chain pattern of a generation job and is validated before execution.
template <typename K, typename V>
struct ChainPlan {
    struct MapStage {
        std::string name;
        MapFn<K, V> fn;
    };
    struct ReduceStage {
        std::string name;
        ReduceFn<K, V> fn;
    };

    std::vector<MapStage> pre_maps;
    ReduceStage reduce;
    std::vector<MapStage> post_maps;
    PartitionFn<K> partitioner = [](const K& k, std::size_t r) {
        return default_partition(k, r);
    };
    std::size_t num_partitions = 1;

    void validate() const {
        if (pre_maps.empty())
            throw ConfigError("chain plan requires at least one pre-map stage");
        for (const auto& s : pre_maps)
            if (!s.fn) throw ConfigError("chain plan pre-map '" + s.name + "' is empty");
        if (!reduce.fn) throw ConfigError("chain plan requires exactly one reduce stage");
        for (const auto& s : post_maps)
            if (!s.fn) throw ConfigError("chain plan post-map '" + s.name + "' is empty");
        if (!partitioner) throw ConfigError("chain plan requires a partitioner");
        if (num_partitions < 1) throw ConfigError("num_partitions must be >= 1");
    }
};

/// Executes a chain plan: pre-map stages in order per split, one shuffle,
/// the reduce per key group, then post-map stages in order per partition.
/// Data stays in memory between chained stages; each (stage, index) task
/// draws its private stream from the seed factory. The result is a pure
/// function of (plan, input, seeds).
template <typename K, typename V>
std::vector<std::vector<Record<K, V>>> run_chain(const ChainPlan<K, V>& plan,
                                                 std::vector<std::vector<Record<K, V>>> input,
                                                 const SeedFactory& seeds,
                                                 unsigned workers = 0) {
    plan.validate();
    if (!seeds) throw ConfigError("run_chain requires a seed factory");

    auto run_stage = [&](const typename ChainPlan<K, V>::MapStage& stage,
                         std::vector<std::vector<Record<K, V>>>& data) {
        std::vector<std::vector<Record<K, V>>> next(data.size());
        detail::run_indexed(data.size(), workers, [&](std::size_t i) {
            try {
                StreamRng rng = seeds(stage.name, i);
                stage.fn(i, std::span<const Record<K, V>>(data[i]), rng, next[i]);
            } catch (...) {
                throw PhaseError(stage.name, i, detail::describe_current_exception());
            }
        });
        data = std::move(next);
    };

    for (const auto& stage : plan.pre_maps) run_stage(stage, input);

    auto grouped = shuffle(std::span<const std::vector<Record<K, V>>>(input), plan.partitioner,
                           plan.num_partitions);

    std::vector<std::vector<Record<K, V>>> partitions(plan.num_partitions);
    detail::run_indexed(plan.num_partitions, workers, [&](std::size_t p) {
        try {
            StreamRng rng = seeds(plan.reduce.name, p);
            for (const auto& group : grouped[p])
                plan.reduce.fn(group.key, std::span<const V>(group.values), rng, partitions[p]);
        } catch (...) {
            throw PhaseError(plan.reduce.name, p, detail::describe_current_exception());
        }
    });

    for (const auto& stage : plan.post_maps) run_stage(stage, partitions);
    return partitions;
}

} // namespace islandga::mr

#endif // ISLANDGA_EXECUTOR_HPP
