#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "ralpha/features.hpp"
#include "ralpha/synth.hpp"
#include "test_helpers.hpp"

using namespace ralpha;
using ralpha::testing::ReviewBuilder;

namespace {

std::vector<ReviewRecord> rich_fixture(std::uint64_t seed, int firms, int weeks) {
    Rng rng(seed);
    std::vector<ReviewRecord> reviews;
    Date start = parse_date("2014-01-06");
    for (int f = 0; f < firms; ++f) {
        for (int w = 0; w < weeks; ++w) {
            int count = rng.poisson(4.0);
            if (w == 0 || w == weeks - 1) count = std::max(count, 1);
            for (int k = 0; k < count; ++k) {
                Date d{start.days + 7 * w + static_cast<std::int32_t>(rng.uniform_int(0, 6))};
                ReviewBuilder b("F" + std::to_string(f), "P" + std::to_string(k % 3),
                                "R" + std::to_string(w) + "_" + std::to_string(k), format_date(d));
                b.star(static_cast<int>(rng.uniform_int(1, 5)))
                    .days(static_cast<int>(rng.uniform_int(0, 40)))
                    .useful(rng.poisson(0.6))
                    .useless(rng.poisson(0.3))
                    .reply(rng.poisson(0.15))
                    .images(rng.poisson(0.5))
                    .words(rng.poisson(1.1), rng.poisson(0.7));
                if (rng.bernoulli(0.45)) b.emotion(static_cast<int>(rng.uniform_int(0, 4)));
                double u = rng.next_double();
                if (u < 0.3) b.client(Client::IPhone);
                else if (u < 0.6) b.client(Client::Android);
                else if (u < 0.7) b.client(Client::WeChat);
                if (rng.bernoulli(0.08)) b.dflt(true).star(5);
                reviews.push_back(b);
            }
        }
    }
    return reviews;
}

}  // namespace

TEST_CASE("catalog cardinality matches an independent per-base count") {
    auto specs = default_window_specs();
    auto catalog = enumerate_catalog(specs);

    // independent tally: per base, (# non-history variants, # history variants),
    // crossed with 12 window lengths and the 71 admissible (n, m) pairs
    struct Row { int non_h, h, copies; };
    std::vector<Row> rows = {
        {3, 1, 1},   // Review
        {5, 2, 5},   // Star^1..Star^5
        {4, 0, 1},   // Star^15
        {5, 2, 1},   // Default
        {3, 1, 1},   // Score
        {7, 3, 5},   // Emotion^0..Emotion^4
        {5, 2, 1},   // Emotion (all)
        {7, 3, 1},   // Emotion^negative
        {5, 2, 2},   // Tendency^posW, ^negW
        {2, 1, 1},   // Tendency^word
        {5, 2, 2},   // Tendency^posR, ^negR
        {5, 2, 2},   // Tendency^pos, ^neg
        {3, 1, 1},   // Tendency (all)
        {3, 2, 1},   // Days (Diff family plus the days-total history diff)
        {5, 2, 8},   // Useful(R), Useless(R), Image(R), Reply(R)
        {5, 2, 4},   // Client^0,2,4,21
        {5, 2, 1},   // Mobile
    };
    int pairs_nm = 0;
    for (const auto& s : specs) pairs_nm += static_cast<int>(s.history.size());
    REQUIRE(pairs_nm == 71);
    std::size_t expected = 0;
    for (const auto& r : rows)
        expected += static_cast<std::size_t>(r.copies) *
                    (static_cast<std::size_t>(r.non_h) * specs.size() +
                     static_cast<std::size_t>(r.h) * static_cast<std::size_t>(pairs_nm));
    CHECK(catalog.size() == expected);
    CHECK(catalog.size() == 7676);
}

TEST_CASE("catalog names are unique and keys valid") {
    auto catalog = enumerate_catalog(default_window_specs());
    std::set<std::string> names;
    for (const auto& key : catalog) {
        validate_key(key);
        CHECK(names.insert(key.name()).second);
    }
}

TEST_CASE("catalog is deterministic and ordered by (category, base, variant, n, m)") {
    auto a = enumerate_catalog(default_window_specs());
    auto b = enumerate_catalog(default_window_specs());
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    for (std::size_t i = 1; i < a.size(); ++i) {
        auto ka = std::tuple(static_cast<int>(a[i - 1].category()), static_cast<int>(a[i - 1].base),
                             static_cast<int>(a[i - 1].variant), a[i - 1].n, a[i - 1].m);
        auto kb = std::tuple(static_cast<int>(a[i].category()), static_cast<int>(a[i].base),
                             static_cast<int>(a[i].variant), a[i].n, a[i].m);
        CHECK(ka < kb);
    }
}

TEST_CASE("review-category keys for a fixed n are exactly the catalog's four forms") {
    WindowSpec spec;
    spec.n = 4;
    spec.history = {6, 8, 10, 12, 16, 20, 24};
    auto catalog = enumerate_catalog({spec});
    std::vector<std::string> review_names;
    for (const auto& key : catalog)
        if (key.category() == Category::Review) review_names.push_back(key.name());
    std::vector<std::string> expected = {"W4Review", "W4ReviewDiff", "W4ReviewDiffRatio",
                                         "W4ReviewDiffH6", "W4ReviewDiffH8", "W4ReviewDiffH10",
                                         "W4ReviewDiffH12", "W4ReviewDiffH16", "W4ReviewDiffH20",
                                         "W4ReviewDiffH24"};
    CHECK(review_names == expected);
}

TEST_CASE("n=1 admits every history length") {
    WindowSpec spec;
    spec.n = 1;
    spec.history = {4, 6, 8, 10, 12, 16, 20, 24};
    auto catalog = enumerate_catalog({spec});
    int h_count = 0;
    for (const auto& key : catalog)
        if (key.base == BaseId::Review && key.variant == Variant::DiffH) ++h_count;
    CHECK(h_count == 8);
    CHECK_THROWS_AS(enumerate_catalog({WindowSpec{4, {4}}}), validation_error);
}

TEST_CASE("canonical names follow the printed forms") {
    CHECK(FeatureKey{BaseId::Client21, Variant::RatioDiffH, 9, 12}.name() ==
          "W9Client^21RatioDiffH12");
    CHECK(FeatureKey{BaseId::Star15, Variant::Base, 3, 0}.name() == "W3Star^15Diff");
    CHECK(FeatureKey{BaseId::Star15, Variant::DiffRatio, 3, 0}.name() == "W3Star^15DiffRatio");
    CHECK(FeatureKey{BaseId::Days, Variant::DaysH, 2, 6}.name() == "W2DaysH6");
    CHECK(FeatureKey{BaseId::EmotionNegative, Variant::RatioEDiffH, 1, 4}.name() ==
          "W1Emotion^negativeRatioEDiffH4");
    CHECK(FeatureKey{BaseId::TendencyPosW, Variant::Average, 5, 0}.name() ==
          "W5Tendency^posWAverage");
}

TEST_CASE("score example: stars [5,5,1] in one week") {
    std::vector<ReviewRecord> reviews;
    Date monday = parse_date("2015-01-05");
    reviews.push_back(ReviewBuilder("F1", "P", "R1", format_date(monday)).star(5));
    reviews.push_back(ReviewBuilder("F1", "P", "R2", format_date(monday)).star(5));
    reviews.push_back(ReviewBuilder("F1", "P", "R3", format_date(monday)).star(1));
    Panel panel = build_weekly_aggregates(reviews);
    const FirmPanel& firm = panel.at("F1");
    double score = feature_value(firm, {BaseId::Score, Variant::Base, 1, 0}, firm.first_week());
    CHECK(score == doctest::Approx(11.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("constant weekly series makes every Diff zero where defined") {
    std::vector<ReviewRecord> reviews;
    Date start = parse_date("2015-01-05");
    for (int w = 0; w < 10; ++w)
        for (int k = 0; k < 3; ++k)
            reviews.push_back(ReviewBuilder("F1", "P", std::to_string(w) + "_" + std::to_string(k),
                                            format_date(Date{start.days + 7 * w}))
                                  .star(4)
                                  .words(2, 1));
    Panel panel = build_weekly_aggregates(reviews);
    const FirmPanel& firm = panel.at("F1");
    FeatureKey diff{BaseId::Review, Variant::Diff, 1, 0};
    for (std::int32_t i = firm.first_week() + 1; i <= firm.last_week(); ++i)
        CHECK(feature_value(firm, diff, i) == 0.0);
    CHECK(is_undefined(feature_value(firm, diff, firm.first_week())));
}

TEST_CASE("zero denominators are undefined markers") {
    std::vector<ReviewRecord> reviews;
    Date start = parse_date("2015-01-05");
    // week 0 has reviews, week 1 empty, week 2 has reviews
    reviews.push_back(ReviewBuilder("F1", "P", "R1", format_date(start)).star(3));
    reviews.push_back(
        ReviewBuilder("F1", "P", "R2", format_date(Date{start.days + 14})).star(4).words(0, 0));
    Panel panel = build_weekly_aggregates(reviews);
    const FirmPanel& firm = panel.at("F1");
    std::int32_t empty_week = firm.first_week() + 1;

    CHECK(is_undefined(feature_value(firm, {BaseId::Score, Variant::Base, 1, 0}, empty_week)));
    CHECK(is_undefined(feature_value(firm, {BaseId::Days, Variant::Base, 1, 0}, empty_week)));
    CHECK(is_undefined(feature_value(firm, {BaseId::Star5, Variant::Ratio, 1, 0}, empty_week)));
    // DiffRatio with a zero previous value
    CHECK(is_undefined(
        feature_value(firm, {BaseId::Review, Variant::DiffRatio, 1, 0}, empty_week + 1)));
    // no tendentious words anywhere: word tendency undefined
    CHECK(is_undefined(
        feature_value(firm, {BaseId::TendencyWord, Variant::Base, 1, 0}, empty_week + 1)));
    // review count itself is zero, defined
    CHECK(feature_value(firm, {BaseId::Review, Variant::Base, 1, 0}, empty_week) == 0.0);
}

TEST_CASE("bounded families stay inside their ranges") {
    auto reviews = rich_fixture(39, 2, 30);
    Panel panel = build_weekly_aggregates(reviews);
    for (const auto& firm : panel.firms()) {
        for (int n : {1, 4, 10}) {
            for (std::int32_t i = firm.first_week(); i <= firm.last_week(); ++i) {
                double word = feature_value(firm, {BaseId::TendencyWord, Variant::Base, n, 0}, i);
                if (!is_undefined(word)) {
                    CHECK(word >= -1.0);
                    CHECK(word <= 1.0);
                }
                for (BaseId b : {BaseId::Star3, BaseId::Mobile, BaseId::Default}) {
                    double ratio = feature_value(firm, {b, Variant::Ratio, n, 0}, i);
                    if (!is_undefined(ratio)) {
                        CHECK(ratio >= 0.0);
                        CHECK(ratio <= 1.0);
                    }
                }
                double score = feature_value(firm, {BaseId::Score, Variant::Base, n, 0}, i);
                if (!is_undefined(score)) {
                    CHECK(score >= 1.0);
                    CHECK(score <= 5.0);
                }
            }
        }
    }
}

TEST_CASE("star partition: ratios sum to one where reviews exist") {
    auto reviews = rich_fixture(31, 1, 30);
    Panel panel = build_weekly_aggregates(reviews);
    const FirmPanel& firm = panel.firms().front();
    for (int n : {1, 3, 8}) {
        for (std::int32_t i = firm.first_week() + n - 1; i <= firm.last_week(); ++i) {
            double reviews_n = firm.window_sum(kReviewCount, n, i);
            if (reviews_n == 0) continue;
            double total = 0;
            for (BaseId b : {BaseId::Star1, BaseId::Star2, BaseId::Star3, BaseId::Star4,
                             BaseId::Star5})
                total += feature_value(firm, {b, Variant::Ratio, n, 0}, i);
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("diff telescoping sums back to the base difference") {
    auto reviews = rich_fixture(32, 1, 30);
    Panel panel = build_weekly_aggregates(reviews);
    const FirmPanel& firm = panel.firms().front();
    FeatureKey base{BaseId::Useful, Variant::Base, 4, 0};
    FeatureKey diff{BaseId::Useful, Variant::Diff, 4, 0};
    std::int32_t a = firm.first_week() + 6, b = firm.last_week();
    double sum = 0;
    bool all_defined = true;
    for (std::int32_t i = a + 1; i <= b; ++i) {
        double d = feature_value(firm, diff, i);
        if (is_undefined(d)) all_defined = false;
        else sum += d;
    }
    REQUIRE(all_defined);
    CHECK(sum == doctest::Approx(feature_value(firm, base, b) - feature_value(firm, base, a))
                     .epsilon(1e-9));
}

TEST_CASE("scale covariance: duplicating all reviews doubles counts, fixes ratios") {
    auto reviews = rich_fixture(33, 1, 24);
    std::vector<ReviewRecord> doubled = reviews;
    for (auto r : reviews) {
        r.review_id += "_dup";
        doubled.push_back(std::move(r));
    }
    Panel p1 = build_weekly_aggregates(reviews);
    Panel p2 = build_weekly_aggregates(doubled);
    const FirmPanel& f1 = p1.firms().front();
    const FirmPanel& f2 = p2.firms().front();

    std::vector<FeatureKey> count_type = {
        {BaseId::Review, Variant::Base, 4, 0},    {BaseId::Star5, Variant::Base, 4, 0},
        {BaseId::Useful, Variant::Base, 4, 0},    {BaseId::TendencyPosW, Variant::Base, 4, 0},
        {BaseId::Client2, Variant::Base, 4, 0},   {BaseId::EmotionNegative, Variant::Base, 4, 0},
        {BaseId::TendencyAll, Variant::Base, 4, 0}};
    std::vector<FeatureKey> scale_free = {
        {BaseId::Star5, Variant::Ratio, 4, 0},    {BaseId::Score, Variant::Base, 4, 0},
        {BaseId::Days, Variant::Base, 4, 0},      {BaseId::Useful, Variant::Average, 4, 0},
        {BaseId::Emotion2, Variant::RatioE, 4, 0}, {BaseId::TendencyWord, Variant::Base, 4, 0},
        {BaseId::Mobile, Variant::Ratio, 4, 0}};

    for (std::int32_t i = f1.first_week() + 3; i <= f1.last_week(); ++i) {
        for (const auto& key : count_type) {
            double a = feature_value(f1, key, i), b = feature_value(f2, key, i);
            REQUIRE_FALSE(is_undefined(a));
            CHECK(b == doctest::Approx(2 * a).epsilon(1e-12));
        }
        for (const auto& key : scale_free) {
            double a = feature_value(f1, key, i), b = feature_value(f2, key, i);
            if (is_undefined(a)) CHECK(is_undefined(b));
            else CHECK(b == doctest::Approx(a).epsilon(1e-12));
        }
    }
}

TEST_CASE("compute_features fills the matrix identically for 1 and 4 threads") {
    auto reviews = rich_fixture(34, 2, 20);
    Panel panel = build_weekly_aggregates(reviews);
    WindowSpec spec;
    spec.n = 2;
    spec.history = {4, 6};
    auto catalog = enumerate_catalog({spec});
    auto m1 = compute_features(panel, catalog, 1);
    auto m4 = compute_features(panel, catalog, 4);
    REQUIRE(m1.num_rows() == m4.num_rows());
    for (std::size_t r = 0; r < m1.num_rows(); ++r)
        for (std::size_t c = 0; c < m1.num_cols(); ++c) {
            double a = m1.at(r, c), b = m4.at(r, c);
            if (is_undefined(a)) CHECK(is_undefined(b));
            else CHECK(a == b);
        }
}

TEST_CASE("shift pairs features of week i-s with rows at week i; composition holds") {
    auto reviews = rich_fixture(35, 1, 12);
    Panel panel = build_weekly_aggregates(reviews);
    WindowSpec spec;
    spec.n = 1;
    spec.history = {};
    auto catalog = enumerate_catalog({spec});
    auto matrix = compute_features(panel, catalog, 1);
    REQUIRE(matrix.num_rows() == 12);

    auto s1 = shift_features(matrix, 1);
    CHECK(s1.num_rows() == 11);  // s=1 on a 12-week series leaves 11 rows
    for (std::size_t r = 0; r < s1.num_rows(); ++r) {
        auto [firm, week] = s1.rows()[r];
        std::size_t src = matrix.find_row(firm, week - 1);
        REQUIRE(src != FeatureMatrix::npos);
        for (std::size_t c = 0; c < matrix.num_cols(); ++c) {
            double a = s1.at(r, c), b = matrix.at(src, c);
            if (is_undefined(b)) CHECK(is_undefined(a));
            else CHECK(a == b);
        }
    }

    auto s3_direct = shift_features(matrix, 3);
    auto s3_chained = shift_features(shift_features(matrix, 2), 1);
    REQUIRE(s3_direct.num_rows() == s3_chained.num_rows());
    for (std::size_t r = 0; r < s3_direct.num_rows(); ++r)
        for (std::size_t c = 0; c < s3_direct.num_cols(); ++c) {
            double a = s3_direct.at(r, c), b = s3_chained.at(r, c);
            if (is_undefined(a)) CHECK(is_undefined(b));
            else CHECK(a == b);
        }

    CHECK_THROWS_AS(shift_features(matrix, 0), validation_error);
    CHECK_THROWS_AS(shift_features(matrix, 13), validation_error);
}

TEST_CASE("matrix cells equal the straight-from-definition oracle on a mixed key set") {
    auto reviews = rich_fixture(36, 3, 60);
    Panel panel = build_weekly_aggregates(reviews);

    std::vector<FeatureKey> keys = {
        {BaseId::Review, Variant::DiffH, 3, 8},
        {BaseId::Star15, Variant::DiffRatio, 2, 0},
        {BaseId::Star15, Variant::Ratio, 2, 0},
        {BaseId::Score, Variant::DiffH, 4, 10},
        {BaseId::Emotion3, Variant::RatioEDiffH, 2, 6},
        {BaseId::EmotionAll, Variant::RatioDiffH, 3, 12},
        {BaseId::TendencyWord, Variant::DiffH, 2, 4},
        {BaseId::TendencyPos, Variant::AverageDiffH, 2, 6},
        {BaseId::TendencyNeg, Variant::Average, 3, 0},
        {BaseId::Days, Variant::DaysH, 2, 8},
        {BaseId::Days, Variant::DiffH, 2, 8},
        {BaseId::UsefulR, Variant::RatioDiff, 5, 0},
        {BaseId::Image, Variant::AverageDiff, 4, 0},
        {BaseId::Client21, Variant::RatioDiffH, 9, 12},
        {BaseId::Mobile, Variant::DiffRatio, 6, 0},
    };
    auto matrix = compute_features(panel, keys, 1);

    for (const auto& firm : panel.firms()) {
        ReviewOracle oracle(reviews, firm.firm_id());
        auto [lo, hi] = matrix.firm_rows(firm.firm_id());
        for (std::size_t r = lo; r < hi; ++r) {
            std::int32_t week = matrix.rows()[r].second;
            for (std::size_t c = 0; c < keys.size(); ++c) {
                double impl = matrix.at(r, c);
                double ref = oracle.feature(keys[c], week);
                if (is_undefined(ref)) {
                    CHECK(is_undefined(impl));
                } else {
                    REQUIRE_FALSE(is_undefined(impl));
                    CHECK(impl == doctest::Approx(ref).epsilon(1e-12));
                }
            }
        }
    }
}
