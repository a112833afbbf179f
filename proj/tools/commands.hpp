#pragma once

#include "cheetah/accelsim.hpp"
#include "cheetah/netdesc.hpp"
#include "cheetah/tuner.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cheetah::cli {

enum ExitCode : int { ok = 0, infeasible = 1, validation_failed = 2, io_error = 3, internal_error = 4 };

/// A check or comparison did not hold; maps to exit code 2.
class ValidationFailure : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string model;
    std::string network_file;
    std::uint64_t seed = 1;
    std::string out; // file for tune/run/validate, directory for simulate

    // grid overrides, "lo..hi" or a single value
    std::string n_list;
    std::string t_bits;
    std::string q_bits;
    std::string w_bits;
    std::string a_bits;
    bool no_security = false;
    unsigned threads = 0;
};

NetworkSpec load_model(const Common& c);
ParamGrid make_grid(const Common& c);
BitRange parse_range(const std::string& text, const char* what);
std::vector<std::size_t> parse_list(const std::string& text, const char* what);
/// Writes to `path`, or stdout when empty.
void emit(const std::string& text, const std::string& path);

struct TuneArgs {
    Common common;
    std::string schedule = "pa";
};
int cmd_tune(const TuneArgs& a);

struct RunArgs {
    Common common;
    std::vector<int> layers; // empty: all
    std::string schedule = "both";
    int trials = 5;
    bool full = false;
    int max_w = 16;
    int max_c = 8;
    int max_fc = 256;
};
int cmd_run(const RunArgs& a);

struct SimulateArgs {
    Common common;
    std::string node = "5nm";
    std::string pes = "2..1024";
    std::string lanes = "4..8192";
    std::string costs_file;
    int ntt_parallel = 0;
    bool io_bound = false;
    double bandwidth = 512;
    std::string cross;
};
int cmd_simulate(const SimulateArgs& a);

struct ValidateArgs {
    Common common;
    int trials = 20;
    bool inject_fault = false;
    bool json = false;
    int max_w = 16;
    int max_c = 8;
    int max_fc = 256;
};
int cmd_validate(const ValidateArgs& a);

} // namespace cheetah::cli
