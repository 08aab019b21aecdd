#pragma once

// Shared plumbing: calendar dates / ISO week indexing, the undefined-value
// marker, seeded RNG sub-streams, error types and small hashing helpers.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace ralpha {

// ---------------------------------------------------------------------------
// errors

// Bad input data or bad arguments: CLI exit code 1.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Unreadable/unwritable files: CLI exit code 2.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

// ---------------------------------------------------------------------------
// undefined-value marker
//
// Feature cells, returns and indicator values use quiet NaN as the explicit
// "undefined" marker (window reaches before history, zero denominator, ...).
// Downstream code must test with is_undefined(), never with ==.

inline double undef() { return std::numeric_limits<double>::quiet_NaN(); }
inline bool is_undefined(double x) { return std::isnan(x); }

// ---------------------------------------------------------------------------
// calendar dates
//
// A Date is a day count since 1970-01-01. Weeks are ISO-8601 weeks (Monday
// start); week_index is days_since_epoch(monday)/7 (floor), so consecutive
// calendar weeks have consecutive indices.

struct Date {
    std::int32_t days = 0;  // days since 1970-01-01

    friend auto operator<=>(const Date&, const Date&) = default;
};

// Howard Hinnant's civil-date algorithms.
std::int32_t days_from_civil(int year, unsigned month, unsigned day);
void civil_from_days(std::int32_t days, int& year, unsigned& month, unsigned& day);

Date parse_date(const std::string& iso);   // "YYYY-MM-DD"; throws validation_error
std::string format_date(Date d);

inline int weekday(Date d) {
    // 0=Monday .. 6=Sunday
    std::int32_t k = (d.days % 7 + 7) % 7;  // 0 == Thursday (1970-01-01)
    return static_cast<int>((k + 3) % 7);
}

inline std::int32_t week_index_of(Date d) {
    std::int32_t monday = d.days - weekday(d);
    // floor division (monday may be negative for pre-1970 dates); Mondays sit
    // at 4 mod 7, so each week maps to one index
    return monday >= 0 ? monday / 7 : -((-monday + 6) / 7);
}

inline Date week_monday(std::int32_t week_index) { return Date{week_index * 7 + 4}; }

// d shifted by n calendar months, clamping the day-of-month (used by the
// review-span filter: "span >= k months" == first + k months <= last).
Date add_months(Date d, int months);

// ---------------------------------------------------------------------------
// hashing (FNV-1a 64) for config hashes and input digests

std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64(const std::string& s);
std::string hex64(std::uint64_t v);

// ---------------------------------------------------------------------------
// seeded RNG
//
// All randomness flows from one root seed through named sub-streams
// ("synth", "fold-shuffle", "subsample", ...) so that any component can be
// re-run in isolation with a reproducible stream. The generator is a
// self-contained splitmix64/xoshiro256** pair: portable across platforms and
// standard libraries, unlike std::*_distribution.

class Rng {
public:
    explicit Rng(std::uint64_t seed);
    Rng(std::uint64_t seed, const std::string& stream_name);

    std::uint64_t next_u64();
    double next_double();                       // uniform [0,1)
    double uniform(double lo, double hi);
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);  // inclusive
    double normal();                            // standard normal
    double gamma(double shape);                 // shape > 0, scale 1
    int poisson(double mean);
    bool bernoulli(double p);

    // Fisher-Yates
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(v[i - 1], v[j]);
        }
    }

    Rng substream(const std::string& name) const;

private:
    std::uint64_t state_[4];
    std::uint64_t root_seed_;
    bool have_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

// ---------------------------------------------------------------------------
// deterministic parallel map
//
// Runs fn(i) for i in [0, n) on up to `threads` workers. Work is split into
// contiguous blocks; results must be written to disjoint slots so the output
// is identical for any thread count.

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

int default_threads();

// logging verbosity from REVIEW_ALPHA_LOG (0 silent .. 2 debug; default 1)
int log_level();
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace ralpha
