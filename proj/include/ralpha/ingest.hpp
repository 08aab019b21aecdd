#pragma once

// Parsing, validation, deduplication and firm filtering of raw review
// records and daily price bars.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ralpha/common.hpp"

namespace ralpha {

// review client codes as they appear on the wire
enum class Client : int { Web = 0, IPhone = 2, Android = 4, WeChat = 21 };

// emotion codes: 0 anger, 1 disgust, 2 joy, 3 sadness, 4 fear
constexpr int kEmotionJoy = 2;
constexpr int kNumEmotions = 5;

enum class UserLevel : int { Ordinary = 0, Silver = 1, Gold = 2, Diamond = 3 };

const char* user_level_name(UserLevel level);
std::optional<UserLevel> parse_user_level(const std::string& name);

struct ReviewRecord {
    std::string firm_id;
    std::string product_id;
    std::string review_id;
    Date posted_at{};
    int star = 0;  // 1..5
    bool is_default = false;
    int days = 0;  // order-to-review gap
    int useful_votes = 0;
    int useless_votes = 0;
    int reply_count = 0;
    int image_count = 0;
    Client user_client = Client::Web;
    bool is_mobile = false;
    std::optional<int> emotion;  // 0..4, absent when the review carries no emotion label
    int pos_words = 0;
    int neg_words = 0;
    std::optional<UserLevel> user_level;
};

struct DailyBar {
    std::string firm_id;
    Date trade_date{};
    double open = 0, high = 0, low = 0, close = 0;
};

enum class MalformedPolicy { Skip, Fail };

struct LoadStats {
    std::size_t parsed = 0;      // records that passed validation (pre-dedup)
    std::size_t skipped = 0;     // malformed lines dropped under Skip policy
    std::size_t duplicates = 0;  // records removed by (product_id, review_id) dedup
};

// Reads JSON-lines review records. Deduplicates on (product_id, review_id)
// keeping the first occurrence in input order, then sorts by
// (firm_id, posted_at, product_id, review_id).
std::vector<ReviewRecord> load_reviews(std::istream& in, MalformedPolicy policy,
                                       LoadStats* stats = nullptr);
std::vector<ReviewRecord> load_reviews_file(const std::string& path, MalformedPolicy policy,
                                            LoadStats* stats = nullptr);

void write_reviews_jsonl(std::ostream& out, const std::vector<ReviewRecord>& reviews);

// Keeps only firms with at least min_reviews records and a posted_at span of
// at least min_span_months calendar months (first + span <= last).
struct FirmFilterResult {
    std::vector<ReviewRecord> reviews;
    std::vector<std::string> eligible_firms;  // sorted
};
FirmFilterResult filter_firms(const std::vector<ReviewRecord>& reviews, int min_reviews = 1000,
                              int min_span_months = 12);

// CSV with header firm_id,trade_date,open,high,low,close. Sorted by
// (firm_id, trade_date); duplicate trading days and non-positive prices are
// validation errors.
std::vector<DailyBar> load_prices(std::istream& in);
std::vector<DailyBar> load_prices_file(const std::string& path);

void write_prices_csv(std::ostream& out, const std::vector<DailyBar>& bars);

}  // namespace ralpha
