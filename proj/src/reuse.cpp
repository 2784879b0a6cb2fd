// SPDX-License-Identifier: Apache-2.0
//
// LRU stack distances in bytes. Each (unit, target) stream is processed with a
// Fenwick tree indexed by access position: the tree holds each object's size
// at the position of its most recent access, so the bytes of distinct data
// touched since an object's previous access is a prefix-sum difference.
#include <algorithm>
#include <unordered_map>

#include "epur/sched.hpp"

namespace epur::sched {

namespace {

class Fenwick {
 public:
  explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {}

  void add(std::size_t pos, std::int64_t delta) {
    for (std::size_t i = pos + 1; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
  }
  // Sum of [0, pos).
  std::int64_t prefix(std::size_t pos) const {
    std::int64_t s = 0;
    for (std::size_t i = pos; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }

 private:
  std::vector<std::int64_t> tree_;
};

std::map<StreamKey, std::vector<std::size_t>> split_streams(std::span<const AccessEvent> events) {
  std::map<StreamKey, std::vector<std::size_t>> streams;
  for (std::size_t i = 0; i < events.size(); ++i) {
    streams[StreamKey{events[i].unit, events[i].target}].push_back(i);
  }
  return streams;
}

}  // namespace

std::vector<std::optional<std::uint64_t>> stack_distances(std::span<const AccessEvent> events) {
  std::vector<std::optional<std::uint64_t>> out(events.size());
  for (const auto& [key, idx] : split_streams(events)) {
    Fenwick tree(idx.size());
    struct Last {
      std::size_t pos;
      std::uint32_t bytes;
    };
    std::unordered_map<std::uint64_t, Last> last;
    last.reserve(idx.size());
    for (std::size_t pos = 0; pos < idx.size(); ++pos) {
      const auto& e = events[idx[pos]];
      auto it = last.find(e.object_key());
      if (it != last.end()) {
        const auto between = tree.prefix(pos) - tree.prefix(it->second.pos + 1);
        out[idx[pos]] = std::uint64_t(between) + e.bytes;
        tree.add(it->second.pos, -std::int64_t(it->second.bytes));
        it->second = Last{pos, e.bytes};
      } else {
        last.emplace(e.object_key(), Last{pos, e.bytes});
      }
      tree.add(pos, e.bytes);
    }
  }
  return out;
}

ReuseStats reuse_analysis(std::span<const AccessEvent> events) {
  require(!events.empty(), ErrorKind::shape, "reuse analysis needs a non-empty trace");
  const auto distances = stack_distances(events);

  ReuseStats stats;
  // Footprints: distinct objects per stream / class, at their last seen size.
  std::map<StreamKey, std::unordered_map<std::uint64_t, std::uint32_t>> stream_objects;
  std::map<ClassKey, std::unordered_map<std::uint64_t, std::uint32_t>> class_objects;

  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    const StreamKey sk{e.unit, e.target};
    const ClassKey ck{e.unit, e.target, e.kind};
    for (ReuseSummary* s : {&stats.streams[sk], &stats.classes[ck]}) {
      ++s->access_count;
      s->bytes += e.bytes;
      if (distances[i]) {
        ++s->reuse_count;
        s->max_reuse_distance = std::max(s->max_reuse_distance, *distances[i]);
      }
    }
    stream_objects[sk][e.object_key()] = e.bytes;
    class_objects[ck][e.object_key()] = e.bytes;
  }
  auto footprint = [](const auto& objects) {
    std::uint64_t total = 0;
    for (const auto& [key, bytes] : objects) total += bytes;
    return total;
  };
  for (auto& [key, s] : stats.streams) {
    s.footprint_bytes = footprint(stream_objects[key]);
    s.min_buffer_bytes = s.max_reuse_distance;
  }
  for (auto& [key, s] : stats.classes) {
    s.footprint_bytes = footprint(class_objects[key]);
    s.min_buffer_bytes = s.max_reuse_distance;
  }
  return stats;
}

ReuseSummary ReuseStats::stream(std::uint8_t unit, Target target) const {
  auto it = streams.find(StreamKey{unit, target});
  return it == streams.end() ? ReuseSummary{} : it->second;
}

ReuseSummary ReuseStats::object_class(std::uint8_t unit, Target target, ObjectKind kind) const {
  auto it = classes.find(ClassKey{unit, target, kind});
  return it == classes.end() ? ReuseSummary{} : it->second;
}

std::uint64_t ReuseStats::min_weight_storage(std::uint8_t unit) const {
  return stream(unit, Target::weight_buffer).min_buffer_bytes +
         stream(unit, Target::row_buffer).min_buffer_bytes;
}

}  // namespace epur::sched
