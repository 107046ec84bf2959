#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "cachesim/cache.hh"
#include "cachesim/coloring.hh"
#include "cachesim/errors.hh"
#include "cachesim/geometry.hh"

using namespace cachesim;

TEST_CASE("color count and mapping table sizes") {
  auto g2 = derive_geometry(2ull << 20, 8, 64, 4096);
  auto g4 = derive_geometry(4ull << 20, 8, 64, 4096);
  auto g16 = derive_geometry(16ull << 20, 8, 64, 4096);
  CHECK(num_colors(g2) == 64);
  CHECK(num_colors(g4) == 128);
  CHECK(num_colors(g16) == 512);
  CHECK(mapping_table_bits(2, 128) == 1792);
  CHECK(mapping_table_bits(4, 256) == 8192);

  // a capacity that is not a whole number of page-sized ways is rejected
  CHECK_THROWS_AS(num_colors(derive_geometry(2ull << 20, 8, 64, 4096 * 3)), ConfigError);
}

TEST_CASE("region and placement decode") {
  auto g = derive_geometry(4ull << 20, 8, 64, 4096);
  uint32_t M = num_colors(g);
  CHECK(g.blocks_per_page() == 64);
  CHECK(g.sets / M == 64);  // sets per color == blocks per page

  CHECK(region_of(0, g, M) == 0);
  CHECK(region_of(63, g, M) == 0);
  CHECK(region_of(64, g, M) == 1);
  CHECK(region_of(64ull * M, g, M) == 0);  // wraps

  // identity mapping reproduces the traditional set index decode
  ColorMap ident;
  ident.region_to_color.resize(M);
  for (uint32_t r = 0; r < M; ++r) ident.region_to_color[r] = r;
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20000; ++i) {
    uint64_t addr = rng() % g.block_addr_space();
    auto pl = locate(addr, ident, g, M);
    CHECK(pl.global_set == addr % g.sets);
    CHECK(pl.tag == addr);
    CHECK(pl.set_in_color == addr % g.blocks_per_page());
  }
}

TEST_CASE("full-tag placement never aliases distinct blocks") {
  auto g = derive_geometry(1ull << 20, 8, 64, 4096);
  uint32_t M = num_colors(g);
  // adversarial map: everything to one color
  ColorMap squash;
  squash.region_to_color.assign(M, 3);
  std::mt19937_64 rng(9);
  std::map<std::pair<uint64_t, uint64_t>, uint64_t> seen;  // (set, tag) -> addr
  for (int i = 0; i < 50000; ++i) {
    uint64_t addr = rng() % g.block_addr_space();
    auto pl = locate(addr, squash, g, M);
    CHECK(pl.color == 3);
    auto key = std::make_pair(pl.global_set, pl.tag);
    auto it = seen.find(key);
    if (it != seen.end()) CHECK(it->second == addr);
    seen[key] = addr;
  }
}

TEST_CASE("balanced map spreads regions evenly") {
  auto map = balanced_map({2, 5, 9}, 12);
  std::map<uint32_t, int> cnt;
  for (auto c : map.region_to_color) cnt[c]++;
  CHECK(cnt.size() == 3);
  CHECK(cnt[2] == 4);
  CHECK(cnt[5] == 4);
  CHECK(cnt[9] == 4);
}

TEST_CASE("rebalance keeps as many assignments as quota allows and is stable") {
  // old: 8 regions on colors {0,1}, move to {1,2}
  ColorMap old = balanced_map({0, 1}, 8);
  ColorMap next = rebalance_map(old, {1, 2}, 8);
  std::map<uint32_t, int> cnt;
  int kept = 0;
  for (uint32_t r = 0; r < 8; ++r) {
    cnt[next.region_to_color[r]]++;
    if (next.region_to_color[r] == old.region_to_color[r]) kept++;
  }
  CHECK(cnt[1] == 4);
  CHECK(cnt[2] == 4);
  CHECK(kept == 4);  // the four regions already on color 1 stay put

  // rebalancing onto the same color set changes nothing
  ColorMap same = rebalance_map(old, {0, 1}, 8);
  CHECK(same.region_to_color == old.region_to_color);
}

TEST_CASE("allocation construction and validation") {
  auto sh = shared_full_allocation(8);
  CHECK(sh.shared);
  CHECK(sh.tables() == 1);
  CHECK(sh.core_colors[0].size() == 8);
  check_allocation(sh, 8);

  auto eq = equal_partition_allocation(3, 8);
  CHECK(eq.tables() == 3);
  CHECK(eq.core_colors[0].size() == 3);
  CHECK(eq.core_colors[1].size() == 3);
  CHECK(eq.core_colors[2].size() == 2);
  check_allocation(eq, 8);

  Allocation bad = eq;
  bad.core_colors[1][0] = bad.core_colors[0][0];
  CHECK_THROWS_AS(check_allocation(bad, 8), InvariantError);
}

TEST_CASE("realize_counts grows from low off-colors and shrinks from high own colors") {
  auto a = equal_partition_allocation(2, 16);  // core0 {0..7}, core1 {8..15}
  // shrink both, leaving off colors
  auto b = realize_counts(a, {6, 4}, 16);
  CHECK(b.core_colors[0] == std::vector<uint32_t>{0, 1, 2, 3, 4, 5});
  CHECK(b.core_colors[1] == std::vector<uint32_t>{8, 9, 10, 11});
  CHECK(b.off_colors == std::vector<uint32_t>{6, 7, 12, 13, 14, 15});
  check_allocation(b, 16);

  // grow core1 back: takes lowest off colors first
  auto c = realize_counts(b, {6, 7}, 16);
  CHECK(c.core_colors[1] == std::vector<uint32_t>{6, 7, 8, 9, 10, 11, 12});
  CHECK(c.off_colors == std::vector<uint32_t>{13, 14, 15});

  // direct transfer: donor's released colors feed the grower
  auto d = realize_counts(a, {10, 6}, 16);
  CHECK(d.core_colors[0].size() == 10);
  CHECK(d.core_colors[1] == std::vector<uint32_t>{8, 9, 10, 11, 12, 13});
  CHECK(d.core_colors[0] == std::vector<uint32_t>{0, 1, 2, 3, 4, 5, 6, 7, 14, 15});
  CHECK(d.off_colors.empty());

  CHECK_THROWS_AS(realize_counts(a, {17, 1}, 16), InvariantError);
  CHECK_THROWS_AS(realize_counts(a, {0, 4}, 16), InvariantError);
}

TEST_CASE("reallocation plan: no-op and simple shrink") {
  uint32_t M = 64;
  auto a = shared_full_allocation(M);
  auto maps = initial_maps(a, M);
  auto plan0 = plan_reallocation(a, maps, a, M);
  CHECK(plan0.empty());

  // shrink shared 64 -> 32 colors
  Allocation half = a;
  half.core_colors[0].assign(32, 0);
  for (uint32_t i = 0; i < 32; ++i) half.core_colors[0][i] = i;
  half.off_colors.clear();
  for (uint32_t i = 32; i < 64; ++i) half.off_colors.push_back(i);
  auto plan = plan_reallocation(a, maps, half, M);
  CHECK(plan.power_off.size() == 32);
  CHECK(plan.power_on.empty());
  CHECK(plan.moves.size() == 32);  // regions 32..63 move
  for (auto& mv : plan.moves) {
    CHECK(mv.region >= 32);
    CHECK(mv.to_color < 32);
  }
}

// Replays a plan against a populated tag store and checks that the flush that
// plan execution implies matches a brute-force count of displaced lines.
TEST_CASE("plan replay flushes exactly the lines of moved regions") {
  // 64KiB, 4-way, 64B blocks, 4KiB pages -> 256 sets, 4 colors, 64 sets/color
  auto g = derive_geometry(256 * 64 * 4, 4, 64, 4096);
  uint32_t M = num_colors(g);
  REQUIRE(M == 4);

  auto a = equal_partition_allocation(2, M);  // {0,1},{2,3}
  auto maps = initial_maps(a, M);
  TagStore store(g.sets, g.assoc, ReplPolicy::LRU, M);

  std::mt19937_64 rng(42);
  std::vector<std::pair<uint32_t, uint64_t>> accesses;
  for (int i = 0; i < 8000; ++i) {
    uint32_t core = rng() & 1;
    uint64_t addr = rng() % g.block_addr_space();
    accesses.push_back({core, addr});
    auto pl = locate(addr, maps[core], g, M);
    store.access(core, pl.global_set, pl.tag,
                 (rng() & 7) == 0 ? AccessKind::Store : AccessKind::Load);
  }

  // move core1 to {3} only, freeing color 2 for core0
  Allocation next;
  next.shared = false;
  next.core_colors = {{0, 1, 2}, {3}};
  auto plan = plan_reallocation(a, maps, next, M);
  CHECK(plan.power_on.empty());
  CHECK(plan.power_off.empty());

  // oracle: count valid lines whose (owner, region) is being remapped
  uint64_t expect = 0;
  for (uint64_t s = 0; s < store.sets(); ++s)
    for (uint32_t w = 0; w < store.assoc(); ++w) {
      auto& ln = store.line(s, w);
      if (!ln.valid) continue;
      uint32_t r = region_of(ln.tag, g, M);
      for (auto& mv : plan.moves)
        if (mv.table == (plan.new_alloc.shared ? 0u : ln.owner) && mv.region == r) {
          expect++;
          break;
        }
    }

  uint64_t flushed = 0;
  for (auto& mv : plan.moves) {
    auto [cl, dr] = store.flush_color(mv.from_color, plan.new_alloc.shared
                                                        ? std::optional<uint32_t>{}
                                                        : std::optional<uint32_t>{mv.table},
                                      mv.region, &g);
    flushed += cl + dr;
  }
  CHECK(flushed == expect);
}

TEST_CASE("rebalance completeness: every region mapped, quotas met, exhaustively") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    uint32_t M = 1u << (3 + trial % 6);  // 8..256
    uint32_t k_old = 1 + rng() % M;
    uint32_t k_new = 1 + rng() % M;
    std::vector<uint32_t> all(M);
    for (uint32_t i = 0; i < M; ++i) all[i] = i;
    std::shuffle(all.begin(), all.end(), rng);
    std::vector<uint32_t> oldc(all.begin(), all.begin() + k_old);
    std::shuffle(all.begin(), all.end(), rng);
    std::vector<uint32_t> newc(all.begin(), all.begin() + k_new);
    std::sort(oldc.begin(), oldc.end());
    std::sort(newc.begin(), newc.end());

    auto m0 = balanced_map(oldc, M);
    auto m1 = rebalance_map(m0, newc, M);
    REQUIRE(m1.region_to_color.size() == M);
    std::map<uint32_t, uint32_t> cnt;
    for (auto c : m1.region_to_color) {
      REQUIRE(std::binary_search(newc.begin(), newc.end(), c));
      cnt[c]++;
    }
    uint32_t q = M / k_new, hi = 0;
    for (auto c : newc) {
      uint32_t n = cnt.count(c) ? cnt[c] : 0;
      REQUIRE(n >= q);
      REQUIRE(n <= q + 1);
      hi += (n == q + 1);
    }
    REQUIRE(hi == M % k_new);
  }
}

TEST_CASE("non power-of-two color subset still covers all regions") {
  uint32_t M = 128;
  std::vector<uint32_t> colors;
  for (uint32_t i = 0; i < 37; ++i) colors.push_back(i * 3 % M);
  std::sort(colors.begin(), colors.end());
  colors.erase(std::unique(colors.begin(), colors.end()), colors.end());
  REQUIRE(colors.size() == 37);
  auto m = balanced_map(colors, M);
  std::set<uint32_t> used(m.region_to_color.begin(), m.region_to_color.end());
  CHECK(used.size() == 37);
}
