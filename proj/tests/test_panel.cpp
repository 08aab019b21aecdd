#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ralpha/panel.hpp"
#include "test_helpers.hpp"

using namespace ralpha;
using ralpha::testing::ReviewBuilder;

namespace {

// brute-force window re-sum straight off the raw records
double brute_window(const std::vector<ReviewRecord>& reviews, const std::string& firm, Counter c,
                    int n, std::int32_t i) {
    double total = 0;
    for (const auto& r : reviews) {
        if (r.firm_id != firm) continue;
        std::int32_t w = week_index_of(r.posted_at);
        if (w < i - n + 1 || w > i) continue;
        WeekCounters counters{};
        accumulate_review(counters, r);
        total += counters[c];
    }
    return total;
}

std::vector<ReviewRecord> random_fixture(std::uint64_t seed, int firms, int weeks) {
    Rng rng(seed);
    std::vector<ReviewRecord> reviews;
    Date start = parse_date("2015-01-05");
    for (int f = 0; f < firms; ++f) {
        for (int w = 0; w < weeks; ++w) {
            int count = rng.poisson(3.0);
            if (w == 0 || w == weeks - 1) count = std::max(count, 1);
            for (int k = 0; k < count; ++k) {
                Date d{start.days + 7 * w + static_cast<std::int32_t>(rng.uniform_int(0, 6))};
                ReviewBuilder b("F" + std::to_string(f), "P",
                                "R" + std::to_string(w) + "_" + std::to_string(k), format_date(d));
                b.star(static_cast<int>(rng.uniform_int(1, 5)))
                    .days(static_cast<int>(rng.uniform_int(0, 30)))
                    .useful(rng.poisson(0.5))
                    .useless(rng.poisson(0.2))
                    .reply(rng.poisson(0.1))
                    .images(rng.poisson(0.4))
                    .words(rng.poisson(1.0), rng.poisson(0.6));
                if (rng.bernoulli(0.4)) b.emotion(static_cast<int>(rng.uniform_int(0, 4)));
                if (rng.bernoulli(0.5))
                    b.client(rng.bernoulli(0.5) ? Client::IPhone : Client::Android);
                if (rng.bernoulli(0.1)) b.dflt(true).star(5);
                reviews.push_back(b);
            }
        }
    }
    return reviews;
}

}  // namespace

TEST_CASE("weekly aggregate: stars, tendency, zero-filled weeks") {
    Date monday = parse_date("2015-01-05");
    std::vector<ReviewRecord> reviews;
    reviews.push_back(ReviewBuilder("F1", "P", "R1", format_date(monday)).star(5));
    reviews.push_back(ReviewBuilder("F1", "P", "R2", format_date(Date{monday.days + 2})).star(5));
    reviews.push_back(ReviewBuilder("F1", "P", "R3", format_date(Date{monday.days + 6})).star(1));
    // a review three weeks later leaves two empty weeks in between
    reviews.push_back(
        ReviewBuilder("F1", "P", "R4", format_date(Date{monday.days + 21})).star(3).words(3, 1));

    Panel panel = build_weekly_aggregates(reviews);
    const FirmPanel& firm = panel.at("F1");
    CHECK(firm.weeks() == 4);

    std::int32_t w0 = week_index_of(monday);
    const auto& first = firm.week(w0);
    CHECK(first[kReviewCount] == 3);
    CHECK(first[kStar5] == 2);
    CHECK(first[kStar1] == 1);

    // zero-filled silent weeks stay present
    CHECK(firm.week(w0 + 1)[kReviewCount] == 0);
    CHECK(firm.week(w0 + 2)[kReviewCount] == 0);

    // pos_words=3, neg_words=1 contributes (3-1)/(3+1) = 0.5
    const auto& last = firm.week(w0 + 3);
    CHECK(last[kPosTendencySum] == doctest::Approx(0.5));
    CHECK(last[kPosReviewCount] == 1);
    CHECK(last[kNegTendencySum] == 0.0);
}

TEST_CASE("per-review tendency") {
    CHECK(review_tendency(3, 1) == doctest::Approx(0.5));
    CHECK(review_tendency(0, 0) == 0.0);
    CHECK(review_tendency(0, 2) == doctest::Approx(-1.0));
    CHECK(review_tendency(2, 2) == 0.0);
}

TEST_CASE("weekly counter invariants on a random fixture") {
    auto reviews = random_fixture(5, 2, 30);
    Panel panel = build_weekly_aggregates(reviews);
    for (const auto& firm : panel.firms()) {
        for (std::int32_t w = firm.first_week(); w <= firm.last_week(); ++w) {
            const auto& c = firm.week(w);
            CHECK(c[kStar1] + c[kStar2] + c[kStar3] + c[kStar4] + c[kStar5] == c[kReviewCount]);
            double emotional = c[kEmotion0] + c[kEmotion1] + c[kEmotion2] + c[kEmotion3] +
                               c[kEmotion4];
            CHECK(c[kEmotionalCount] == emotional);
            CHECK(c[kNegEmotionCount] == emotional - c[kEmotion2]);
            CHECK(c[kMobileCount] <= c[kReviewCount]);
            CHECK(c[kUsefulRCount] <= c[kReviewCount]);
            CHECK(c[kNegTendencySum] <= 0.0);
            CHECK(c[kPosTendencySum] >= 0.0);
        }
    }
}

TEST_CASE("window_sum examples") {
    // weekly review counts [2,3,5]
    std::vector<ReviewRecord> reviews;
    Date start = parse_date("2015-01-05");
    int counts[3] = {2, 3, 5};
    for (int w = 0; w < 3; ++w)
        for (int k = 0; k < counts[w]; ++k)
            reviews.push_back(ReviewBuilder("F1", "P", std::to_string(w) + "_" + std::to_string(k),
                                            format_date(Date{start.days + 7 * w})));
    Panel panel = build_weekly_aggregates(reviews);
    const FirmPanel& firm = panel.at("F1");
    std::int32_t last = firm.last_week();

    CHECK(firm.window_sum(kReviewCount, 2, last) == 8);
    CHECK(firm.window_sum(kReviewCount, 1, last) == 5);  // n=1 equals the week's counter
    CHECK(firm.window_sum(kReviewCount, 3, last) == 10);
    // window reaching before the series start is undefined, not zero
    CHECK(is_undefined(firm.window_sum(kReviewCount, 4, last)));
    CHECK(is_undefined(firm.window_sum(kReviewCount, 1, firm.first_week() - 1)));
}

TEST_CASE("window_sum equals brute-force re-sum for all (n, i, counter)") {
    auto reviews = random_fixture(11, 3, 26);
    Panel panel = build_weekly_aggregates(reviews);
    for (const auto& firm : panel.firms()) {
        for (int n = 1; n <= 12; ++n) {
            for (std::int32_t i = firm.first_week(); i <= firm.last_week(); ++i) {
                for (Counter c : {kReviewCount, kStar5, kDaysSum, kPosTendencySum, kClientIPhone,
                                  kEmotionalCount}) {
                    double fast = firm.window_sum(c, n, i);
                    if (i - n + 1 < firm.first_week()) {
                        CHECK(is_undefined(fast));
                    } else {
                        CHECK(fast ==
                              doctest::Approx(brute_window(reviews, firm.firm_id(), c, n, i))
                                  .epsilon(1e-12));
                    }
                }
            }
        }
    }
}

TEST_CASE("window additivity: sum(n,i) = sum(k,i) + sum(n-k, i-k)") {
    auto reviews = random_fixture(17, 1, 30);
    Panel panel = build_weekly_aggregates(reviews);
    const FirmPanel& firm = panel.firms().front();
    for (int n = 2; n <= 10; ++n) {
        for (int k = 1; k < n; ++k) {
            for (std::int32_t i = firm.first_week() + n - 1; i <= firm.last_week(); ++i) {
                double whole = firm.window_sum(kReviewCount, n, i);
                double head = firm.window_sum(kReviewCount, k, i);
                double tail = firm.window_sum(kReviewCount, n - k, i - k);
                CHECK(whole == doctest::Approx(head + tail).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("inserting an empty week preserves window sums over the same calendar span") {
    Date start = parse_date("2015-01-05");
    std::vector<ReviewRecord> dense, sparse;
    for (int w = 0; w < 6; ++w) {
        int week_offset = w < 3 ? w : w + 2;  // sparse version skips two calendar weeks
        for (int k = 0; k < 2 + w; ++k) {
            dense.push_back(ReviewBuilder("F1", "P", std::to_string(w) + "_" + std::to_string(k),
                                          format_date(Date{start.days + 7 * w})));
            sparse.push_back(ReviewBuilder("F1", "P", std::to_string(w) + "_" + std::to_string(k),
                                           format_date(Date{start.days + 7 * week_offset})));
        }
    }
    Panel pd = build_weekly_aggregates(dense);
    Panel ps = build_weekly_aggregates(sparse);
    const FirmPanel& fd = pd.at("F1");
    const FirmPanel& fs = ps.at("F1");
    CHECK(fs.weeks() == fd.weeks() + 2);
    // a window covering the whole span sums to the same total
    CHECK(fd.window_sum(kReviewCount, static_cast<int>(fd.weeks()), fd.last_week()) ==
          fs.window_sum(kReviewCount, static_cast<int>(fs.weeks()), fs.last_week()));
    // the tail window after the gap is unchanged
    CHECK(fd.window_sum(kReviewCount, 3, fd.last_week()) ==
          fs.window_sum(kReviewCount, 3, fs.last_week()));
}

TEST_CASE("default window specs enforce m > n") {
    auto specs = default_window_specs();
    REQUIRE(specs.size() == 12);
    int total_h = 0;
    for (const auto& s : specs) {
        for (int m : s.history) CHECK(m > s.n);
        total_h += static_cast<int>(s.history.size());
    }
    CHECK(specs[0].history.size() == 8);  // n=1 admits every m
    CHECK(specs[11].history.size() == 3);
    CHECK(total_h == 71);
}
