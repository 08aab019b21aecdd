#include "ralpha/common.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <mutex>

namespace ralpha {

// ---------------------------------------------------------------------------
// civil dates

std::int32_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);            // [0, 399]
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;  // [0, 365]
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;           // [0, 146096]
    return era * 146097 + static_cast<std::int32_t>(doe) - 719468;
}

void civil_from_days(std::int32_t z, int& year, unsigned& month, unsigned& day) {
    z += 719468;
    const int era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int y = static_cast<int>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    day = doy - (153 * mp + 2) / 5 + 1;
    month = mp + (mp < 10 ? 3 : -9);
    year = y + (month <= 2);
}

Date parse_date(const std::string& iso) {
    int y = 0, m = 0, d = 0;
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-')
        throw validation_error("bad date '" + iso + "' (expected YYYY-MM-DD)");
    auto num = [&](int lo, int hi, int& out) {
        auto [p, ec] = std::from_chars(iso.data() + lo, iso.data() + hi, out);
        if (ec != std::errc() || p != iso.data() + hi)
            throw validation_error("bad date '" + iso + "' (expected YYYY-MM-DD)");
    };
    num(0, 4, y);
    num(5, 7, m);
    num(8, 10, d);
    if (m < 1 || m > 12 || d < 1 || d > 31)
        throw validation_error("bad date '" + iso + "' (month/day out of range)");
    return Date{days_from_civil(y, static_cast<unsigned>(m), static_cast<unsigned>(d))};
}

std::string format_date(Date d) {
    int y;
    unsigned m, dd;
    civil_from_days(d.days, y, m, dd);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, m, dd);
    return buf;
}

namespace {
unsigned days_in_month(int y, unsigned m) {
    static const unsigned n[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && ((y % 4 == 0 && y % 100 != 0) || y % 400 == 0)) return 29;
    return n[m - 1];
}
}  // namespace

Date add_months(Date d, int months) {
    int y;
    unsigned m, dd;
    civil_from_days(d.days, y, m, dd);
    int total = y * 12 + static_cast<int>(m) - 1 + months;
    int ny = total >= 0 ? total / 12 : -((-total + 11) / 12);
    unsigned nm = static_cast<unsigned>(total - ny * 12 + 1);
    unsigned nd = std::min(dd, days_in_month(ny, nm));
    return Date{days_from_civil(ny, nm, nd)};
}

// ---------------------------------------------------------------------------

std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// ---------------------------------------------------------------------------
// Rng: xoshiro256** seeded via splitmix64

namespace {
inline std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

Rng::Rng(std::uint64_t seed) : root_seed_(seed) {
    std::uint64_t s = seed;
    for (auto& w : state_) w = splitmix64(s);
}

Rng::Rng(std::uint64_t seed, const std::string& stream_name)
    : Rng(seed ^ fnv1a64(stream_name)) {
    root_seed_ = seed;
}

Rng Rng::substream(const std::string& name) const { return Rng(root_seed_, name); }

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Rng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
    // rejection sampling over the span, bias-free
    std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(next_u64());  // full range
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t v;
    do {
        v = next_u64();
    } while (v >= limit);
    return lo + static_cast<std::int64_t>(v % span);
}

double Rng::normal() {
    if (have_spare_normal_) {
        have_spare_normal_ = false;
        return spare_normal_;
    }
    // Marsaglia polar method
    double u, v, s;
    do {
        u = uniform(-1.0, 1.0);
        v = uniform(-1.0, 1.0);
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_normal_ = v * f;
    have_spare_normal_ = true;
    return u * f;
}

double Rng::gamma(double shape) {
    // Marsaglia-Tsang; boost small shapes
    if (shape < 1.0) {
        double u = next_double();
        while (u <= 0.0) u = next_double();
        return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        double u = next_double();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

int Rng::poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 30.0) {
        // Knuth product method
        double limit = std::exp(-mean), prod = next_double();
        int n = 0;
        while (prod > limit) {
            prod *= next_double();
            ++n;
        }
        return n;
    }
    // split recursively to keep the product method in its numeric range
    double half = std::floor(mean / 2.0);
    return poisson(half) + poisson(mean - half);
}

bool Rng::bernoulli(double p) { return next_double() < p; }

// ---------------------------------------------------------------------------

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    std::size_t nthreads = threads <= 0 ? 1 : static_cast<std::size_t>(threads);
    nthreads = std::min(nthreads, n);
    if (nthreads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    std::size_t chunk = (n + nthreads - 1) / nthreads;
    for (std::size_t t = 0; t < nthreads; ++t) {
        std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

int default_threads() {
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

int log_level() {
    static int level = [] {
        const char* env = std::getenv("REVIEW_ALPHA_LOG");
        if (!env) return 1;
        return std::atoi(env);
    }();
    return level;
}

namespace {
std::mutex g_log_mutex;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) {
        std::lock_guard<std::mutex> lock(g_log_mutex);
        std::cerr << "[review-alpha] " << msg << "\n";
    }
}

void log_debug(const std::string& msg) {
    if (log_level() >= 2) {
        std::lock_guard<std::mutex> lock(g_log_mutex);
        std::cerr << "[review-alpha] " << msg << "\n";
    }
}

}  // namespace ralpha
