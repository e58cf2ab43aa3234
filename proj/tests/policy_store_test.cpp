#include <gtest/gtest.h>

#include <filesystem>
#include <map>
#include <random>

#include "dstc/policy_store.hpp"

namespace dstc {
namespace {

Date d(int y, unsigned m, unsigned day) { return Date::from_ymd(y, m, day); }

PolicyRecord rec(Date from, Date to, bool revoke = false, bool isd = false) {
  PolicyRecord p;
  p.valid_from = from;
  p.valid_to = to;
  p.revoke = revoke;
  p.include_sub_domain = isd;
  p.report = "admin@example.com";
  return p;
}

const PolicyRecord kCurrent = rec(d(2018, 5, 1), d(2019, 5, 1));
const Date kNow = d(2018, 5, 6);

TEST(PolicyStore, UpdateOutcomes) {
  PolicyStore s;
  EXPECT_EQ(s.update("example.com", kCurrent, kNow), StoreAction::StoredNew);
  EXPECT_EQ(s.update("example.com", kCurrent, kNow), StoreAction::Unchanged);
  EXPECT_EQ(s.update("example.com", rec(d(2018, 1, 1), d(2019, 1, 1)), kNow), StoreAction::RejectedStale);
  auto same_day = kCurrent;
  same_day.report = "other@example.com";
  EXPECT_EQ(s.update("example.com", same_day, kNow), StoreAction::RejectedStale);
  EXPECT_EQ(s.entry("example.com")->record, kCurrent);
  const auto newer = rec(d(2018, 5, 3), d(2019, 6, 1));
  EXPECT_EQ(s.update("example.com", newer, kNow), StoreAction::Replaced);
  EXPECT_EQ(s.entry("example.com")->record, newer);
  EXPECT_EQ(s.update("example.com", rec(d(2018, 6, 1), d(2019, 1, 1), true), d(2018, 6, 2)),
            StoreAction::RevokedDeleted);
  EXPECT_FALSE(s.entry("example.com"));
  ASSERT_TRUE(s.tombstone("example.com"));
  // The tombstone spans the revoked policy's own window.
  EXPECT_EQ(s.tombstone("example.com")->valid_to, d(2019, 6, 1));
}

TEST(PolicyStore, RevokeWithoutEntryIsNotStored) {
  PolicyStore s;
  EXPECT_EQ(s.update("example.com", rec(d(2018, 6, 1), d(2019, 1, 1), true), kNow), StoreAction::Unchanged);
  EXPECT_TRUE(s.entries().empty());
  EXPECT_TRUE(s.tombstones().empty());
}

TEST(PolicyStore, TombstoneRejectsReplayUntilExpiry) {
  PolicyStore s;
  s.update("example.com", kCurrent, kNow);
  s.update("example.com", rec(d(2018, 6, 1), d(2019, 5, 1), true), d(2018, 6, 2));
  EXPECT_EQ(s.update("example.com", kCurrent, d(2018, 6, 3)), StoreAction::RejectedStale);
  EXPECT_EQ(s.update("example.com", rec(d(2018, 6, 1), d(2019, 5, 1)), d(2018, 6, 3)), StoreAction::RejectedStale);
  EXPECT_FALSE(s.entry("example.com"));
  // A genuinely newer policy lifts the tombstone.
  EXPECT_EQ(s.update("example.com", rec(d(2018, 7, 1), d(2019, 7, 1)), d(2018, 7, 2)), StoreAction::StoredNew);
  EXPECT_FALSE(s.tombstone("example.com"));
}

TEST(PolicyStore, ObserveAbsence) {
  PolicyStore s;
  EXPECT_EQ(s.observe_absence("example.com", Disposition::NoRecord, kNow), StoreAction::Unchanged);
  s.update("example.com", kCurrent, kNow);
  EXPECT_EQ(s.observe_absence("example.com", Disposition::NoRecord, kNow), StoreAction::DropAlarm);
  EXPECT_EQ(s.observe_absence("example.com", Disposition::NoSuchDomain, kNow), StoreAction::DropAlarm);
  EXPECT_TRUE(s.entry("example.com"));
  EXPECT_EQ(s.observe_absence("example.com", Disposition::NoRecord, d(2019, 5, 2)), StoreAction::Unchanged);
  EXPECT_FALSE(s.entry("example.com"));
}

TEST(PolicyStore, ExpiredEntryCountsAsFirstConnection) {
  PolicyStore s;
  s.update("example.com", kCurrent, kNow);
  EXPECT_EQ(s.update("example.com", rec(d(2017, 1, 1), d(2020, 1, 1)), d(2019, 5, 2)), StoreAction::StoredNew);
}

TEST(PolicyStore, SubdomainLookup) {
  for (bool www_first : {false, true}) {
    PolicyStore s;
    const auto parent = rec(d(2018, 5, 1), d(2019, 5, 1), false, true);
    const auto child = rec(d(2018, 5, 2), d(2019, 5, 1));
    if (www_first) s.update("www.example.com", child, kNow);
    s.update("example.com", parent, kNow);
    if (!www_first) s.update("www.example.com", child, kNow);
    EXPECT_EQ(s.lookup("www.example.com", kNow)->domain, "www.example.com");
    EXPECT_EQ(s.lookup("mail.example.com", kNow)->domain, "example.com");
    EXPECT_EQ(s.lookup("a.b.example.com", kNow)->domain, "example.com");
    EXPECT_FALSE(s.lookup("example.org", kNow));
    EXPECT_FALSE(s.lookup("mail.example.com", d(2019, 5, 2)));
  }
  PolicyStore s;
  s.update("example.com", kCurrent, kNow);
  EXPECT_FALSE(s.lookup("www.example.com", kNow));
  EXPECT_TRUE(s.lookup("Example.COM.", kNow));
}

TEST(PolicyStore, PersistenceAndParseErrors) {
  PolicyStore s;
  s.update("a.example", kCurrent, kNow);
  s.update("b.example", kCurrent, kNow);
  s.update("b.example", rec(d(2018, 6, 1), d(2019, 5, 1), true), d(2018, 6, 2));
  const auto path = std::filesystem::temp_directory_path() / "dstc_store_test.txt";
  s.save_file(path);
  const auto back = PolicyStore::load_file(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back.to_text(), s.to_text());
  EXPECT_EQ(back.tombstones(), s.tombstones());
  for (const char* bad : {"POLICY a.example 06-05-2018 v=spf1", "TOMBSTONE a.example 01-01-2019 01-01-2018",
                          "POLICY a.example 2018-05-06 name=DSTC", "WHAT a.example 01-01-2018",
                          "TOMBSTONE a.example 01-01-2018 01-01-2019\nTOMBSTONE a.example 01-01-2018 01-01-2019"}) {
    EXPECT_THROW(PolicyStore::parse(bad), StoreError) << bad;
  }
  EXPECT_THROW(PolicyStore::load_file("/nonexistent/store"), StoreError);
}

// Random delivery interleavings: genuine records, replays, revocations and
// drops across a few related domains, with the clock moving forward.
TEST(PolicyStoreProperty, RandomInterleavings) {
  const std::vector<std::string> domains = {"a.example", "b.example", "www.a.example"};
  std::mt19937_64 rng(2018);
  std::uniform_int_distribution<int> pick_domain(0, 2), pick_from(0, 60), pick_span(0, 90), coin(0, 9),
      step(0, 4), ops(5, 40);
  const Date epoch = d(2018, 1, 1);
  constexpr int kSequences = 10000;
  long checked = 0;

  for (int seq = 0; seq < kSequences; ++seq) {
    PolicyStore s;
    Date now = epoch.plus_days(pick_from(rng));
    for (int n = ops(rng); n > 0; --n) {
      now = now.plus_days(step(rng));
      const auto& dom = domains[pick_domain(rng)];
      const auto before = s.entry(dom);
      const auto tomb = s.tombstone(dom);
      const bool before_live = before && policy_status(before->record, now) != PolicyStatus::Expired;
      const bool tomb_live = tomb && now <= tomb->valid_to;

      if (coin(rng) == 0) {
        const auto act = s.observe_absence(dom, Disposition::NoRecord, now);
        ASSERT_EQ(act, before_live ? StoreAction::DropAlarm : StoreAction::Unchanged);
        if (before_live) ASSERT_EQ(s.entry(dom), before);
        continue;
      }
      const Date from = epoch.plus_days(pick_from(rng));
      const auto incoming = rec(from, from.plus_days(pick_span(rng)), coin(rng) < 2, coin(rng) < 5);
      const auto act = s.update(dom, incoming, now);
      const auto after = s.entry(dom);
      ++checked;

      // Never store a revoking record.
      if (after) ASSERT_FALSE(after->record.revoke);
      // Tombstone durability.
      if (tomb_live && incoming.valid_from <= tomb->valid_from) {
        ASSERT_EQ(act, StoreAction::RejectedStale);
        ASSERT_EQ(s.tombstone(dom), tomb);
        ASSERT_EQ(after, before);
      }
      // Replay immunity and monotonicity against a live entry.
      if (before_live) {
        if (incoming.valid_from < before->record.valid_from) {
          ASSERT_EQ(act, StoreAction::RejectedStale);
          ASSERT_EQ(after, before);
        }
        if (after) ASSERT_GE(after->record.valid_from, before->record.valid_from);
        if (incoming.valid_from > before->record.valid_from && !tomb_live) {
          ASSERT_EQ(act, incoming.revoke ? StoreAction::RevokedDeleted : StoreAction::Replaced);
        }
      }
      if (act == StoreAction::RevokedDeleted) {
        ASSERT_FALSE(after);
        ASSERT_TRUE(s.tombstone(dom));
        ASSERT_EQ(s.tombstone(dom)->valid_from, incoming.valid_from);
      }
      if (act == StoreAction::StoredNew || act == StoreAction::Replaced) ASSERT_EQ(after->record, incoming);
    }
    // Persistence is bit-exact.
    const auto text = s.to_text();
    const auto back = PolicyStore::parse(text);
    ASSERT_EQ(back.to_text(), text);
    ASSERT_EQ(back.tombstones(), s.tombstones());
    const auto e1 = s.entries(), e2 = back.entries();
    ASSERT_EQ(e1.size(), e2.size());
    for (std::size_t i = 0; i < e1.size(); ++i) {
      ASSERT_EQ(e1[i].domain, e2[i].domain);
      ASSERT_EQ(e1[i].record, e2[i].record);
      ASSERT_EQ(e1[i].stored_at, e2[i].stored_at);
    }
  }
  EXPECT_GT(checked, kSequences * 5L);
}

}  // namespace
}  // namespace dstc
