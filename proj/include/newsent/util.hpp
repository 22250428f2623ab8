#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace newsent {

// Error taxonomy surfaced by the CLI: the category selects the exit code.
enum class ErrorClass { config, data, environment, internal };

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const std::string& msg) : std::runtime_error(msg), cls_(cls) {}
    ErrorClass cls() const { return cls_; }

private:
    ErrorClass cls_;
};

[[noreturn]] inline void fail_config(const std::string& msg) { throw Error(ErrorClass::config, msg); }
[[noreturn]] inline void fail_data(const std::string& msg) { throw Error(ErrorClass::data, msg); }
[[noreturn]] inline void fail_env(const std::string& msg) { throw Error(ErrorClass::environment, msg); }

const char* error_class_name(ErrorClass cls);

// ---- string helpers ----------------------------------------------------

std::string to_lower_ascii(std::string_view s);
std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

// Section tags are compared after trimming and ASCII case-folding.
std::string canonical_section(std::string_view s);

// Locale-free float formatting (shortest round-trip form). All persisted
// tables go through this so re-runs are byte-identical.
std::string fmt_double(double v);

std::optional<long long> parse_int(std::string_view s);
std::optional<double> parse_double(std::string_view s);

// ---- files ---------------------------------------------------------------

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, std::string_view content);

// 64-bit FNV-1a over file bytes; used as the input fingerprint in run
// manifests. Not cryptographic.
std::uint64_t fnv1a64(std::string_view bytes);
std::string file_fingerprint(const std::filesystem::path& p);

// Timestamp stamped into manifests: the NEWSENT_TIMESTAMP environment value
// when set, else a fixed epoch string so artifacts are byte-stable by
// default.
std::string created_stamp();

// ---- deterministic randomness --------------------------------------------
//
// std::shuffle and the distribution classes are implementation-defined, so
// every sampling decision in the project goes through this wrapper to keep
// artifacts reproducible across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(static_cast<std::mt19937::result_type>(seed)) {}

    std::uint32_t next_u32() { return gen_(); }

    // uniform in [0, n)
    std::uint32_t uniform(std::uint32_t n);

    // uniform in [0, 1)
    double uniform01();

    bool bernoulli(double p) { return uniform01() < p; }

    // standard normal via Box-Muller
    double normal();

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = uniform(static_cast<std::uint32_t>(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace newsent
