#include <gtest/gtest.h>

#include <random>

#include "brute_force.hpp"
#include "hcbr/mermaid.hpp"
#include "test_support.hpp"

using namespace hcbr;

constexpr int kIterations = 1000;

TEST(HierarchyProperties, SerializeParseRoundTrip) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < kIterations; ++i) {
    const Hierarchy h = fixture::random_hierarchy(rng);
    const std::string text = serialize_hierarchy(h);
    ASSERT_EQ(parse_hierarchy(text), h) << text;
    ASSERT_EQ(parse_hierarchy(text, {.strict = true}), h) << text;
    ASSERT_EQ(serialize_hierarchy(parse_hierarchy(text)), text);
  }
}

TEST(HierarchyProperties, AncestorsMatchSquaringClosure) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 300; ++i) {
    const Hierarchy h = fixture::random_hierarchy(rng, 30, 0.2);
    const auto closure = oracle::transitive_closure(h);
    for (std::uint32_t u = 0; u < h.size(); ++u) {
      std::vector<NodeIndex> expected;
      for (std::uint32_t v = 0; v < h.size(); ++v) {
        if (closure[u][v]) expected.push_back(NodeIndex{v});
      }
      ASSERT_EQ(h.ancestors(NodeIndex{u}), expected);
    }
  }
}

TEST(HierarchyProperties, SupportMatchesPathEnumeration) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 300; ++i) {
    const Hierarchy h = fixture::random_hierarchy(rng, 18, 0.25);
    for (std::uint32_t u = 0; u < h.size(); ++u) {
      for (std::uint32_t v = 0; v < h.size(); ++v) {
        ASSERT_EQ(h.support_strength(NodeIndex{u}, NodeIndex{v}),
                  oracle::path_support(h, NodeIndex{u}, NodeIndex{v}));
      }
    }
  }
}

TEST(HierarchyProperties, MonotoneReachabilityAndTopologicalOrder) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < kIterations; ++i) {
    const Hierarchy h = fixture::random_hierarchy(rng);
    std::vector<std::size_t> position(h.size());
    const auto order = h.topological_order();
    ASSERT_EQ(order.size(), h.size());
    for (std::size_t k = 0; k < order.size(); ++k) position[order[k].value] = k;

    for (const Edge& e : h.edges()) {
      ASSERT_LT(position[e.source.value], position[e.target.value]);
      const auto up = h.ancestors(e.source);
      ASSERT_TRUE(std::binary_search(up.begin(), up.end(), e.target));
      for (NodeIndex a : h.ancestors(e.target)) {
        ASSERT_TRUE(std::binary_search(up.begin(), up.end(), a));
      }
    }
    for (std::uint32_t u = 0; u < h.size(); ++u) {
      for (std::uint32_t v = 0; v < h.size(); ++v) {
        const Support s = h.support_strength(NodeIndex{u}, NodeIndex{v});
        const auto up = h.ancestors(NodeIndex{u});
        ASSERT_EQ(s != Support::None, std::binary_search(up.begin(), up.end(), NodeIndex{v}));
      }
    }
  }
}
