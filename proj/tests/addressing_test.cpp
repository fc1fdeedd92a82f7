#include <gtest/gtest.h>

#include <random>

#include "pnet/addressing.hpp"

using namespace pnet;

TEST(Address, ParsesLiterals) {
  auto a = MultipletAddress::parse("vlan:10,mac:00:00:11:11:11:BB");
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a.outermost().label, "vlan");
  EXPECT_EQ(a.find("mac")->value, "00:00:11:11:11:BB");
  EXPECT_EQ(a.to_string(), "vlan:10,mac:00:00:11:11:11:BB");
}

TEST(Address, IpLiteralSplitsOnOctetBoundary) {
  auto a = MultipletAddress::parse("ip:128.39.78.4/24");
  EXPECT_EQ(a.to_string(), "prefix:128.39.78,local:4");
  EXPECT_EQ(MultipletAddress::parse("ip:10.1.2.3/16").to_string(), "prefix:10.1,local:2.3");
  EXPECT_EQ(MultipletAddress::parse("ip:10.1.2.3/8").to_string(), "prefix:10,local:1.2.3");
  EXPECT_THROW(MultipletAddress::parse("ip:10.1.2.3/20"), ModelError);
  EXPECT_THROW(MultipletAddress::parse("ip:10.1.2.300/24"), ModelError);
  EXPECT_THROW(MultipletAddress::parse("ip:10.1.2/24"), ModelError);
}

TEST(Address, ValidatesComponents) {
  EXPECT_THROW(MultipletAddress::parse("vlan:0"), ModelError);
  EXPECT_THROW(MultipletAddress::parse("vlan:4095"), ModelError);
  EXPECT_NO_THROW(MultipletAddress::parse("vlan:4094"));
  EXPECT_THROW(MultipletAddress::parse("tni:16777216"), ModelError);
  EXPECT_NO_THROW(MultipletAddress::parse("tni:16777215"));
  EXPECT_THROW(MultipletAddress::parse("mac:00:11"), ModelError);
  EXPECT_THROW(MultipletAddress::parse("colour:red"), ModelError);
  EXPECT_THROW(MultipletAddress::parse("mac:00:00:00:00:00:01,mac:00:00:00:00:00:02"), ModelError);
  EXPECT_THROW(MultipletAddress(std::vector<AddressComponent>{}), ModelError);
}

TEST(Address, AtMostEightComponents) {
  std::vector<AddressComponent> cs{{"tni", "1"}, {"vlan", "2"}, {"prefix", "3"}, {"local", "4"},
                                   {"mac", "00:00:00:00:00:05"}, {"symbolic", "six"}};
  EXPECT_NO_THROW(MultipletAddress{cs});
  EXPECT_EQ(kMaxAddressComponents, 8u);
}

TEST(Scaling, SpotValues) {
  auto s = scaling_split({32, 24});
  EXPECT_EQ(s.containers, 16777216);
  EXPECT_EQ(s.per_container, 256);
  s = scaling_split({8, 0});
  EXPECT_EQ(s.containers, 1);
  EXPECT_EQ(s.per_container, 256);
  s = scaling_split({10, 4});
  EXPECT_EQ(s.containers, 16);
  EXPECT_EQ(s.per_container, 64);
  EXPECT_THROW(scaling_split({8, 9}), ModelError);
}

TEST(Scaling, ExactBeyondMachineWords) {
  auto s = scaling_split({128, 64});
  BigCount expected = 1;
  for (int i = 0; i < 64; ++i) expected *= 2;
  EXPECT_EQ(s.containers, expected);
  EXPECT_EQ(s.containers * s.per_container, expected * expected);
}

TEST(ScalingProperty, ExhaustiveUpToThirtyBits) {
  for (unsigned n = 0; n <= 30; ++n)
    for (unsigned p = 0; p <= n; ++p) {
      auto s = scaling_split({n, p});
      long long containers = 1LL << p, per = 1LL << (n - p);
      ASSERT_EQ(s.containers, containers) << n << "/" << p;
      ASSERT_EQ(s.per_container, per) << n << "/" << p;
      ASSERT_EQ(s.containers * s.per_container, 1LL << n);
    }
}

TEST(SameScope, Examples) {
  auto a = MultipletAddress::parse("ip:128.39.78.4/24");
  auto b = MultipletAddress::parse("ip:128.39.78.1/24");
  EXPECT_TRUE(same_scope(a, b, "prefix"));
  EXPECT_FALSE(same_scope(a, b, "local"));
  EXPECT_TRUE(same_scope(a, a, "local"));
  EXPECT_FALSE(same_scope(MultipletAddress::parse("vlan:10"), MultipletAddress::parse("vlan:20"), "vlan"));
  EXPECT_THROW(same_scope(a, MultipletAddress::parse("vlan:10"), "vlan"), ModelError);
}

TEST(SameScopeProperty, EquivalenceRelation) {
  std::mt19937_64 rng(3);
  std::vector<MultipletAddress> as;
  std::uniform_int_distribution<int> v(1, 3);
  for (int i = 0; i < 40; ++i)
    as.push_back(MultipletAddress::parse("vlan:" + std::to_string(v(rng)) + ",prefix:10." + std::to_string(v(rng))));
  for (const char* label : {"vlan", "prefix"})
    for (const auto& x : as) {
      EXPECT_TRUE(same_scope(x, x, label));
      for (const auto& y : as) {
        EXPECT_EQ(same_scope(x, y, label), same_scope(y, x, label));
        for (const auto& z : as)
          if (same_scope(x, y, label) && same_scope(y, z, label)) EXPECT_TRUE(same_scope(x, z, label));
      }
    }
}

TEST(Transduce, ArpSubstitutesMac) {
  TransducerTable arp{"arp", {{{{"local", "1"}}, {{"mac", "00:00:11:11:11:AA"}}}}, std::nullopt};
  auto r = transduce(arp, MultipletAddress::parse("ip:128.39.78.1/24"));
  EXPECT_TRUE(r.matched);
  EXPECT_EQ(r.address.to_string(), "prefix:128.39.78,mac:00:00:11:11:11:AA");
}

TEST(Transduce, DefaultAndNoMatch) {
  TransducerTable with_default{"t", {}, std::vector<AddressComponent>{{"symbolic", "eth0"}}};
  auto r = transduce(with_default, MultipletAddress::parse("ip:10.9.9.9/24"));
  EXPECT_TRUE(r.defaulted);
  EXPECT_EQ(r.address.to_string(), "symbolic:eth0");
  TransducerTable empty{"t", {}, std::nullopt};
  auto addr = MultipletAddress::parse("ip:10.9.9.9/24");
  auto n = transduce(empty, addr);
  EXPECT_TRUE(n.no_match());
  EXPECT_EQ(n.address, addr);
}

TEST(Transduce, LongestMatchThenInsertionOrder) {
  TransducerTable rib{"rib",
                      {{{{"prefix", "128.39"}}, {{"symbolic", "wide"}}},
                       {{{"prefix", "128.39.78"}}, {{"symbolic", "narrow"}}},
                       {{{"prefix", "128.39.78"}}, {{"symbolic", "later"}}}},
                      std::nullopt};
  EXPECT_EQ(*lookup(rib, MultipletAddress::parse("ip:128.39.78.4/24")), 1u);
  EXPECT_EQ(*lookup(rib, MultipletAddress::parse("ip:128.39.5.4/24")), 0u);
  EXPECT_FALSE(lookup(rib, MultipletAddress::parse("ip:128.40.1.1/24")));
  EXPECT_FALSE(lookup(rib, MultipletAddress::parse("prefix:128.390")));
}

TEST(TransduceProperty, IdempotentOnceRewrittenAwayFromEntries) {
  std::mt19937_64 rng(11);
  TransducerTable arp{"arp", {}, std::nullopt};
  for (int i = 1; i <= 20; ++i) {
    char mac[32];
    std::snprintf(mac, sizeof mac, "00:00:11:11:11:%02x", i);
    arp.entries.push_back({{{"local", std::to_string(i)}}, {{"mac", mac}}});
  }
  std::uniform_int_distribution<int> host(1, 30);
  for (int i = 0; i < 500; ++i) {
    auto addr = MultipletAddress::parse("prefix:10.0.0,local:" + std::to_string(host(rng)));
    auto once = transduce(arp, addr).address;
    EXPECT_EQ(transduce(arp, once).address, once);
  }
}

TEST(Tunnel, EncapsulateAndDecapsulate) {
  auto inner = MultipletAddress::parse("mac:00:00:11:11:11:BB");
  auto outer = encapsulate(inner, {"tni", "5000"});
  EXPECT_EQ(outer.to_string(), "tni:5000,mac:00:00:11:11:11:BB");
  auto [c, back] = decapsulate(outer);
  EXPECT_EQ(c.to_string(), "tni:5000");
  EXPECT_EQ(back, inner);
  auto [p, rest] = decapsulate(MultipletAddress::parse("ip:10.1.1.4/24"));
  EXPECT_EQ(p.label, "prefix");
  EXPECT_EQ(rest.to_string(), "local:4");
  EXPECT_THROW(decapsulate(MultipletAddress::parse("mac:00:00:11:11:11:AA")), ModelError);
  EXPECT_THROW(encapsulate(outer, {"tni", "1"}), ModelError);
}

TEST(Tunnel, TripletNesting) {
  auto guest = MultipletAddress::parse("mac:02:00:00:00:00:01");
  auto host = encapsulate(guest, {"vlan", "7"});
  auto outside = encapsulate(host, {"tni", "42"});
  ASSERT_EQ(outside.size(), 3u);
  EXPECT_EQ(outside.to_string(), "tni:42,vlan:7,mac:02:00:00:00:00:01");
  EXPECT_EQ(visible_components(outside).size(), 1u);
}

TEST(TunnelProperty, DecapsulateInvertsEncapsulate) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> n(1, 4000);
  const std::vector<std::string> labels{"tni", "vlan", "symbolic"};
  for (int i = 0; i < 1000; ++i) {
    auto addr = MultipletAddress::parse("prefix:10." + std::to_string(n(rng) % 256) + ",local:" + std::to_string(n(rng)));
    const auto& label = labels[static_cast<std::size_t>(i) % labels.size()];
    std::string value = label == "symbolic" ? "s" + std::to_string(n(rng)) : std::to_string(n(rng));
    AddressComponent c{label, value};
    auto [outer, inner] = decapsulate(encapsulate(addr, c));
    ASSERT_EQ(outer, c);
    ASSERT_EQ(inner, addr);
  }
}
