#pragma once

// Per-firm, per-week raw sums over validated reviews, plus trailing-window
// accumulation on top of prefix sums. Every basic feature in the catalog is
// a function of these counters.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ralpha/ingest.hpp"

namespace ralpha {

// Raw weekly counters. Tendency sums are signed (neg_tendency <= 0); all
// others are non-negative.
enum Counter : int {
    kReviewCount = 0,
    kStar1,
    kStar2,
    kStar3,
    kStar4,
    kStar5,
    kDefaultCount,
    kEmotion0,
    kEmotion1,
    kEmotion2,
    kEmotion3,
    kEmotion4,
    kEmotionalCount,    // reviews carrying any emotion label
    kNegEmotionCount,   // emotional minus joy
    kPosWordsSum,
    kNegWordsSum,
    kPosReviewCount,    // reviews with pos_words > neg_words
    kNegReviewCount,    // reviews with pos_words < neg_words
    kPosTendencySum,    // sum of ReviewTen over pos-leaning reviews
    kNegTendencySum,    // sum of ReviewTen over neg-leaning reviews (<= 0)
    kDaysSum,
    kUsefulSum,
    kUsefulRCount,      // reviews with >= 1 useful vote
    kUselessSum,
    kUselessRCount,
    kImageSum,
    kImageRCount,
    kReplySum,
    kReplyRCount,
    kClientWeb,
    kClientIPhone,
    kClientAndroid,
    kClientWeChat,
    kMobileCount,
    kNumCounters
};

const char* counter_name(Counter c);

using WeekCounters = std::array<double, kNumCounters>;

// per-review word tendency: (pos-neg)/(pos+neg), 0 when no tendentious words
double review_tendency(int pos_words, int neg_words);

struct FirmWeekAggregate {
    std::string firm_id;
    std::int32_t week_index = 0;
    WeekCounters counts{};
};

// Contiguous weekly series for one firm, zero-filled over [first_week,
// first_week + weeks() - 1]. Window sums run off immutable prefix arrays and
// are safe for concurrent readers.
class FirmPanel {
public:
    FirmPanel(std::string firm_id, std::int32_t first_week, std::vector<WeekCounters> weekly);

    const std::string& firm_id() const { return firm_id_; }
    std::int32_t first_week() const { return first_week_; }
    std::int32_t last_week() const { return first_week_ + static_cast<std::int32_t>(weeks()) - 1; }
    std::size_t weeks() const { return weekly_.size(); }
    bool contains_week(std::int32_t week) const {
        return week >= first_week_ && week <= last_week();
    }

    const WeekCounters& week(std::int32_t week_index) const;

    // Sum of one counter over the trailing n-week window ending at week i
    // (inclusive). Undefined when the window starts before the series.
    double window_sum(Counter c, int n, std::int32_t i) const;

private:
    std::string firm_id_;
    std::int32_t first_week_;
    std::vector<WeekCounters> weekly_;
    std::vector<WeekCounters> prefix_;  // prefix_[k] = sum of weekly_[0..k-1]
};

struct WindowSpec {
    int n = 1;            // trailing window length, 1..12
    // relative-history lengths admissible for H variants; every m must
    // exceed n
    std::vector<int> history;
};

// n in [1,12] crossed with m in {4,6,8,10,12,16,20,24 | m > n}
std::vector<WindowSpec> default_window_specs();

class Panel {
public:
    explicit Panel(std::vector<FirmPanel> firms);

    const std::vector<FirmPanel>& firms() const { return firms_; }
    const FirmPanel* find(const std::string& firm_id) const;
    const FirmPanel& at(const std::string& firm_id) const;

private:
    std::vector<FirmPanel> firms_;                 // sorted by firm_id
    std::map<std::string, std::size_t> by_firm_;
};

// One aggregate row per (firm, week) in the firm's [first, last] review-week
// range, zero-filled for silent weeks.
Panel build_weekly_aggregates(const std::vector<ReviewRecord>& reviews);

// accumulate one review into a counter row
void accumulate_review(WeekCounters& c, const ReviewRecord& r);

// CSV dump, one row per (firm, week): used by oracle tests and the CLI.
void write_panel_csv(std::ostream& out, const Panel& panel);

}  // namespace ralpha
