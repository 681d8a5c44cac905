#pragma once

// Command-line front end. run_cli is the whole program minus process setup,
// so tests drive it with string vectors and string streams.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace cayley::cli {

enum class Command { Critical, Classify, SweepGamma, Iterate, ConditionSum, Verify };
const char* to_string(Command c);
Command command_from_string(const std::string& name);

enum class ProfileKind { None, PowerLaw, Geometric, File };

struct ProfileSpec {
    ProfileKind kind = ProfileKind::None;
    double gamma = 0.0;
    double ratio = 0.0;
    double amplitude = 0.0;
    std::string path;            // source file for File profiles
    std::vector<double> values;  // file contents, echoed so the report is self-contained

    bool operator==(const ProfileSpec&) const = default;
};

enum class OutputFormat { Json, Csv };

// Everything a run depends on. workers and out only steer execution and are
// not echoed into reports, so output bytes do not depend on them.
struct RunConfig {
    Command command = Command::Critical;
    int d = 2;
    double J = 1.0;
    std::optional<double> beta;
    std::optional<double> theta;
    ProfileSpec profile;
    std::string h = "0";  // number, or auto / +auto / -auto for +-h_c
    std::vector<std::int64_t> depths{250, 500, 1000, 2000, 4000};
    std::vector<std::int64_t> probes{1, 5, 10};
    double tau_gap = 1e-4;
    double tau_uniq = 1e-6;
    std::vector<double> gammas{1.0, 1.25, 1.5, 1.75, 2.0};
    std::string seed_b = "inf";
    std::int64_t from = 40;
    std::int64_t to = 1;
    std::int64_t horizon = 1000;
    // verify grid; empty means the built-in default
    std::vector<int> verify_d;
    std::vector<int> verify_depths;
    std::vector<double> verify_betas;
    std::vector<double> verify_boundaries;

    OutputFormat format = OutputFormat::Json;
    std::string out;
    int workers = 1;

    bool operator==(const RunConfig&) const = default;
};

nlohmann::ordered_json config_to_json(const RunConfig& config);
// Inverse of config_to_json; execution-only fields keep their defaults.
RunConfig config_from_json(const nlohmann::json& j);

// Parses a %.17g number written by the reports; accepts inf, -inf and nan.
double parse_number(const std::string& text);
std::string format_number(double x);

// Exit codes: 0 success, 1 verification failure, 2 usage or configuration error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cayley::cli
