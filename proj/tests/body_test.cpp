#include <gtest/gtest.h>

#include <random>

#include "pnet/body.hpp"

using namespace pnet;

TEST(Body, ParsesAndCanonicalizes) {
  auto b = Body::parse("+deliver{vlan=10,mac=00:00:11:11:11:BB}");
  EXPECT_EQ(b.polarity, Polarity::give);
  EXPECT_EQ(b.kind, "deliver");
  EXPECT_EQ(b.canonical(), "+deliver{mac=00:00:11:11:11:BB,vlan=10}");
  EXPECT_EQ(Body::parse("-web").canonical(), "-web");
}

TEST(Body, DisjunctionsAndGuardsAreSorted) {
  auto b = Body::parse("-db{provider=db3|db1|db2}");
  EXPECT_EQ(b.canonical(), "-db{provider=db1|db2|db3}");
  auto g = Body::parse("-deliver{mac=*?destination-equals-self}");
  EXPECT_EQ(g.params.at("mac").guard, Guard::destination_equals_self);
  EXPECT_EQ(Body::parse(g.canonical()), g);
}

TEST(Body, RejectsMalformedText) {
  EXPECT_THROW(Body::parse("deliver"), ModelError);
  EXPECT_THROW(Body::parse("+"), ModelError);
  EXPECT_THROW(Body::parse("+deliver{mac}"), ModelError);
  EXPECT_THROW(Body::parse("+deliver{mac=1"), ModelError);
  EXPECT_THROW(Body::parse("+de liver"), ModelError);
  EXPECT_THROW(Body::parse("+x{a=1?no-such-guard}"), ModelError);
}

TEST(Body, FlipKeepsParams) {
  auto b = Body::parse("+web{port=80}");
  EXPECT_EQ(b.flipped().canonical(), "-web{port=80}");
  EXPECT_EQ(b.flipped().flipped(), b);
}

TEST(MatchBodies, WildcardUseAdmitsLiteral) {
  auto m = match_bodies(Body::parse("+deliver{dst=BB}"), Body::parse("-deliver{dst=*}"));
  ASSERT_TRUE(m);
  EXPECT_EQ(m->params.at("dst").canonical(), "BB");
}

TEST(MatchBodies, IdenticalBodiesMatch) {
  auto m = match_bodies(Body::parse("+deliver{dst=BB}"), Body::parse("-deliver{dst=BB}"));
  ASSERT_TRUE(m);
  EXPECT_EQ(m->params.at("dst").canonical(), "BB");
}

TEST(MatchBodies, KindMismatchIsAbsent) {
  EXPECT_FALSE(match_bodies(Body::parse("+deliver{dst=BB}"), Body::parse("-forward{dst=BB}")));
  EXPECT_FALSE(match_bodies(Body::parse("+web"), Body::parse("-db")));
}

TEST(MatchBodies, ForwardServesDeliver) {
  EXPECT_TRUE(match_bodies(Body::parse("+forward{mac=BB}"), Body::parse("-deliver{mac=*}")));
}

TEST(MatchBodies, DisjointLiteralsDoNotMatch) {
  EXPECT_FALSE(match_bodies(Body::parse("+db{provider=db1}"), Body::parse("-db{provider=db2|db3}")));
  auto m = match_bodies(Body::parse("+db{provider=db1|db2}"), Body::parse("-db{provider=db2|db3}"));
  ASSERT_TRUE(m);
  EXPECT_EQ(m->params.at("provider").canonical(), "db2");
}

TEST(MatchBodies, OneSidedKeysPassThrough) {
  auto m = match_bodies(Body::parse("+deliver{mac=BB}"), Body::parse("-deliver{service=db}"));
  ASSERT_TRUE(m);
  EXPECT_EQ(m->params.size(), 2u);
}

TEST(MatchBodies, GuardsAreReportedWithTheirSide) {
  auto m = match_bodies(Body::parse("+mac-identity{mac=AA?distinct-from-all-peers}"),
                        Body::parse("-mac-identity{mac=*?destination-equals-self}"));
  ASSERT_TRUE(m);
  ASSERT_EQ(m->guards.size(), 2u);
  EXPECT_EQ(m->guards[0].side, MatchSide::give);
  EXPECT_EQ(m->guards[1].side, MatchSide::use);
}

TEST(MatchBodies, WrongPolaritiesThrow) {
  EXPECT_THROW(match_bodies(Body::parse("-web"), Body::parse("+web")), ModelError);
  EXPECT_THROW(match_bodies(Body::parse("+web"), Body::parse("+web")), ModelError);
}

// Matching is the intersection of admitted values on every shared key.
TEST(MatchBodiesProperty, AgreesWithValueIntersection) {
  std::mt19937_64 rng(17);
  const std::vector<std::string> values{"a", "b", "c", "d"};
  auto random_pattern = [&] {
    std::uniform_int_distribution<int> coin(0, 4);
    if (coin(rng) == 0) return Pattern::wildcard();
    std::set<std::string> alts;
    for (const auto& v : values)
      if (coin(rng) < 2) alts.insert(v);
    if (alts.empty()) alts.insert("a");
    return Pattern::any_of(alts);
  };
  for (int i = 0; i < 2000; ++i) {
    Params plus{{"k", random_pattern()}}, minus{{"k", random_pattern()}};
    bool expected = false;
    for (const auto& v : values)
      if (plus.at("k").admits(v) && minus.at("k").admits(v)) expected = true;
    if (plus.at("k").is_wildcard() && minus.at("k").is_wildcard()) expected = true;
    auto m = match_bodies(Body(Polarity::give, "s", plus), Body(Polarity::use, "s", minus));
    EXPECT_EQ(m.has_value(), expected) << Body(Polarity::give, "s", plus).canonical() << " vs "
                                       << Body(Polarity::use, "s", minus).canonical();
  }
}
