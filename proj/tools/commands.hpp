#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gwflow/case_io.hpp"

namespace gwflow::cli {

struct BenchPoint {
    int threads = 1;
    double cells_per_thread = 0.0;
    std::vector<double> times;   ///< s, one per repeat
    double median = 0.0;         ///< s
    double speedup = 1.0;        ///< median at the smallest thread count / median here
    bool identical = true;       ///< final head bit-identical to the reference run
};

struct BenchReport {
    std::string case_name;
    long long cells = 0;
    int steps = 0;
    int hardware_threads = 1;
    std::vector<BenchPoint> points;   ///< sorted by thread count

    bool monotone() const;
    bool deterministic() const;
};

/// Times `steps` steps of the case for each thread count; outputs are disabled.
BenchReport bench(const CaseConfig& cfg, std::vector<int> threads, int steps, int repeats, std::ostream& log);
void print_bench(const BenchReport& report, std::ostream& out);

struct CheckLine {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Golden values, oracle comparison and the full tutorial run. `alpha_factor`
/// scales the retention alpha of the checked model (negative control).
std::vector<CheckLine> validate(double alpha_factor, std::ostream& log);

/// Text of the shipped 1Dinfiltration case.
const char* embedded_infiltration_case();

} // namespace gwflow::cli
