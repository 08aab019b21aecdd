#pragma once

// The feature catalog and its evaluation over the weekly panel.
//
// Every feature is W{n}<Base><Variant>[H{m}]: a base statistic over the
// trailing n-week window, optionally transformed against the previous week
// or against the m-week window ending n weeks back. Cells are undefined
// (NaN) when any operand window reaches before the firm's first review week
// or a denominator is zero; imputation happens once, at dataset assembly,
// never here.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ralpha/panel.hpp"

namespace ralpha {

enum class Category : int {
    Review = 0,
    Star,
    Default,
    Score,
    Emotion,
    Tendency,
    Days,
    Useful,
    Useless,
    Image,
    Reply,
    Client,
    Mobile
};

const char* category_name(Category c);

// Base series within a category, in catalog order.
enum class BaseId : int {
    Review = 0,
    Star1, Star2, Star3, Star4, Star5,
    Star15,      // star-5 count minus star-1 count; its Base render carries "Diff"
    Default,
    Score,       // sum(s * star_s) / reviews
    Emotion0, Emotion1, Emotion2, Emotion3, Emotion4,
    EmotionAll,       // emotional review count
    EmotionNegative,  // anger/disgust/sadness/fear
    TendencyPosW, TendencyNegW,
    TendencyWord,     // (posW - negW) / (posW + negW)
    TendencyPosR, TendencyNegR,
    TendencyPos, TendencyNeg,
    TendencyAll,      // pos tendency sum + neg tendency sum
    Days,             // days_sum / reviews
    Useful, UsefulR,
    Useless, UselessR,
    Image, ImageR,
    Reply, ReplyR,
    Client0, Client2, Client4, Client21,
    Mobile,
    kNumBases
};

const char* base_label(BaseId b);   // e.g. "Star^5", "Emotion^negative", "Client^21"
Category base_category(BaseId b);

enum class Variant : int {
    Base = 0,
    Diff,          // x_i - x_{i-1}
    DiffRatio,     // (x_i - x_{i-1}) / x_{i-1}
    Ratio,         // x_i / W_nReview_i
    RatioDiff,     // Ratio_i - Ratio_{i-1}
    DiffH,         // W_n x_i - W_m x_{i-n}
    RatioDiffH,    // W_n Ratio_i - W_m Ratio_{i-n}
    Average,       // x_i / denom_i (Review, or pos/neg review count for signed tendency)
    AverageDiff,
    AverageDiffH,
    RatioE,        // x_i / W_nEmotion_i
    RatioEDiff,
    RatioEDiffH,
    DaysH          // days-sum difference: W_nDays*W_nReview - W_mDays*W_mReview
};

const char* variant_suffix(Variant v);
bool variant_uses_history(Variant v);

// variants each base admits, in catalog order
std::vector<Variant> admissible_variants(BaseId b);

struct FeatureKey {
    BaseId base = BaseId::Review;
    Variant variant = Variant::Base;
    int n = 1;  // 1..12
    int m = 0;  // 0 unless the variant uses history

    Category category() const { return base_category(base); }
    std::string name() const;  // canonical "W{n}{Base}{Variant}[H{m}]", unique per key

    friend bool operator==(const FeatureKey&, const FeatureKey&) = default;
};

void validate_key(const FeatureKey& key);  // throws validation_error

// Exactly the (base, variant) pairs the catalog defines, crossed with all
// admissible (n, m) from the window set, ordered by
// (category, base, variant, n, m).
std::vector<FeatureKey> enumerate_catalog(const std::vector<WindowSpec>& specs);

// Dense (firm, week) x feature panel. Rows grouped by firm (panel order),
// weeks ascending within a firm.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::vector<FeatureKey> catalog,
                  std::vector<std::pair<std::string, std::int32_t>> rows);
    // column set without catalog keys (synthetic corpora)
    FeatureMatrix(std::vector<std::string> names,
                  std::vector<std::pair<std::string, std::int32_t>> rows);

    std::size_t num_rows() const { return rows_.size(); }
    std::size_t num_cols() const { return names_.size(); }
    // empty when the matrix was built from bare column names
    const std::vector<FeatureKey>& catalog() const { return catalog_; }
    const std::vector<std::string>& names() const { return names_; }
    const std::vector<std::pair<std::string, std::int32_t>>& rows() const { return rows_; }

    double at(std::size_t row, std::size_t col) const { return values_[row * names_.size() + col]; }
    void set(std::size_t row, std::size_t col, double v) { values_[row * names_.size() + col] = v; }
    const std::vector<double>& values() const { return values_; }

    // contiguous [begin, end) row range of one firm; rows are firm-grouped
    std::pair<std::size_t, std::size_t> firm_rows(const std::string& firm_id) const;
    // row index of (firm, week) or npos
    std::size_t find_row(const std::string& firm_id, std::int32_t week) const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    std::vector<FeatureKey> catalog_;
    std::vector<std::string> names_;
    std::vector<std::pair<std::string, std::int32_t>> rows_;
    std::vector<double> values_;
};

// Evaluates one feature cell straight off the panel's window sums.
double feature_value(const FirmPanel& firm, const FeatureKey& key, std::int32_t week);

FeatureMatrix compute_features(const Panel& panel, const std::vector<FeatureKey>& catalog,
                               int threads = 1);

// Row (firm, i) receives the values originally at (firm, i-s); rows without
// a source are dropped. s in [1,12].
FeatureMatrix shift_features(const FeatureMatrix& matrix, int s);

// CSV export plus a sidecar manifest of ordered column names.
void write_features_csv(std::ostream& out, const FeatureMatrix& matrix);
void write_catalog_manifest(std::ostream& out, const std::vector<FeatureKey>& catalog);

}  // namespace ralpha
