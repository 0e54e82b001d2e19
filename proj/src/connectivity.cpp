#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "capseg/superpixel.hpp"

namespace capseg {

namespace {

// 4-connected components of equal raw labels, numbered in raster order.
std::vector<std::int32_t> label_components(const Raster<std::int32_t>& labels, int& count) {
  const int w = labels.width();
  const int h = labels.height();
  std::vector<std::int32_t> comp(labels.size(), -1);
  std::vector<std::size_t> stack;
  count = 0;
  for (std::size_t seed = 0; seed < labels.size(); ++seed) {
    if (comp[seed] >= 0) continue;
    const std::int32_t raw = labels[seed];
    comp[seed] = count;
    stack.push_back(seed);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const int x = static_cast<int>(i % static_cast<std::size_t>(w));
      const int y = static_cast<int>(i / static_cast<std::size_t>(w));
      auto visit = [&](int nx, int ny) {
        const std::size_t j = labels.index(nx, ny);
        if (comp[j] < 0 && labels[j] == raw) {
          comp[j] = count;
          stack.push_back(j);
        }
      };
      if (x > 0) visit(x - 1, y);
      if (x + 1 < w) visit(x + 1, y);
      if (y > 0) visit(x, y - 1);
      if (y + 1 < h) visit(x, y + 1);
    }
    ++count;
  }
  return comp;
}

}  // namespace

SuperpixelMap enforce_connectivity(const Raster<std::int32_t>& labels, double target_size) {
  const int w = labels.width();
  const int h = labels.height();
  int n = 0;
  std::vector<std::int32_t> comp = label_components(labels, n);
  const auto count = static_cast<std::size_t>(n);

  std::vector<std::int32_t> owner(count);
  std::iota(owner.begin(), owner.end(), 0);

  const double min_size = target_size / 2.0;
  if (min_size > 0 && n > 1) {
    std::vector<std::size_t> size(count, 0);
    for (std::int32_t c : comp) ++size[static_cast<std::size_t>(c)];

    // Shared boundary length between adjacent fragments.
    std::vector<std::unordered_map<std::int32_t, std::size_t>> adj(count);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::int32_t a = comp[labels.index(x, y)];
        if (x + 1 < w) {
          const std::int32_t b = comp[labels.index(x + 1, y)];
          if (a != b) {
            ++adj[static_cast<std::size_t>(a)][b];
            ++adj[static_cast<std::size_t>(b)][a];
          }
        }
        if (y + 1 < h) {
          const std::int32_t b = comp[labels.index(x, y + 1)];
          if (a != b) {
            ++adj[static_cast<std::size_t>(a)][b];
            ++adj[static_cast<std::size_t>(b)][a];
          }
        }
      }
    }

    bool merged = true;
    while (merged) {
      merged = false;
      for (std::size_t id = 0; id < count; ++id) {
        if (owner[id] != static_cast<std::int32_t>(id)) continue;
        if (static_cast<double>(size[id]) >= min_size || adj[id].empty()) continue;

        std::int32_t target = -1;
        std::size_t longest = 0;
        for (const auto& [nb, len] : adj[id]) {
          if (len > longest || (len == longest && nb < target)) {
            target = nb;
            longest = len;
          }
        }
        const auto t = static_cast<std::size_t>(target);
        owner[id] = target;
        size[t] += size[id];
        for (const auto& [nb, len] : adj[id]) {
          if (nb == target) continue;
          const auto k = static_cast<std::size_t>(nb);
          adj[t][nb] += len;
          adj[k][target] += len;
          adj[k].erase(static_cast<std::int32_t>(id));
        }
        adj[t].erase(static_cast<std::int32_t>(id));
        adj[id].clear();
        merged = true;
      }
    }
  }

  auto find = [&](std::int32_t c) {
    while (owner[static_cast<std::size_t>(c)] != c) c = owner[static_cast<std::size_t>(c)];
    return c;
  };

  std::vector<std::int32_t> compact(count, -1);
  std::int32_t next = 0;
  Raster<std::int32_t> out(w, h);
  for (std::size_t i = 0; i < comp.size(); ++i) {
    const auto root = static_cast<std::size_t>(find(comp[i]));
    if (compact[root] < 0) compact[root] = next++;
    out[i] = compact[root];
  }
  return SuperpixelMap(std::move(out), next);
}

SuperpixelMap enforce_connectivity(const SuperpixelMap& map, double target_size) {
  return enforce_connectivity(map.labels(), target_size);
}

Raster<std::uint8_t> boundary_mask(const SuperpixelMap& map) {
  const int w = map.width();
  const int h = map.height();
  Raster<std::uint8_t> edges(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::int32_t l = map.at(x, y);
      if ((x + 1 < w && map.at(x + 1, y) != l) || (y + 1 < h && map.at(x, y + 1) != l)) {
        edges.at(x, y) = 1;
      }
    }
  }
  return edges;
}

bool is_four_connected(const SuperpixelMap& map) {
  int fragments = 0;
  label_components(map.labels(), fragments);
  return fragments == map.count();
}

}  // namespace capseg
