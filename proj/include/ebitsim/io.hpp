#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ebitsim/ebit.hpp"
#include "ebitsim/sampler.hpp"
#include "ebitsim/tomography.hpp"
#include "ebitsim/types.hpp"
#include "ebitsim/wigner.hpp"

namespace ebitsim {

/// Unreadable or malformed data file. Messages carry path:line so the
/// offending record can be found; the CLI maps this to its I/O exit code.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shortest decimal form that reparses to the identical double (%.17g).
std::string format_double(double v);

// ---------------------------------------------------------------- samples

/// Metadata carried in the comment lines of a sample file.
struct SampleFileMeta {
    std::string generator;
    std::uint64_t seed = 0;
    double eta = 0;
    double alpha = 0;
    double beta = 0;
    std::int64_t n_samples = 0;
    double phi_state = 0;
    int bins = 0;
    bool vacuum = true;
    std::string input_sha256;
};

void write_samples(const std::string& path,
                   const std::vector<QuadratureSample>& samples,
                   const SampleFileMeta& meta);

/// Reads a sample file back. Unknown metadata tokens are skipped so the
/// format can grow; malformed records raise IoError naming the line.
std::vector<QuadratureSample> read_samples(const std::string& path,
                                           SampleFileMeta* meta = nullptr);

// --------------------------------------------------- operators and states

void write_density(const std::string& path, const DensityMatrix& rho,
                   const std::string& input_sha256);

DensityMatrix read_density(const std::string& path);

void write_ket(const std::string& path, const TwoModeKet& ket,
               const std::string& input_sha256);

// ----------------------------------------------------- grids and reports

void write_wigner_grid(const std::string& path, const WignerGrid& grid,
                       const std::string& input_sha256);

/// Flat key=value file, rows written in the given order.
void write_report(const std::string& path,
                  const std::vector<std::pair<std::string, std::string>>& rows,
                  const std::string& input_sha256);

// ----------------------------------------------------------- config file

/// Config syntax problem (unknown key, bad value); message carries
/// file:line. Semantic range violations are reported by validate_config
/// instead.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct PipelineConfig {
    ExperimentParams experiment;
    std::int64_t n_samples = 1000000;
    int n_phase_bins = 100;
    std::uint64_t seed = 1;
    bool include_vacuum_bin = true;
    ReconstructionConfig reconstruction;
    std::string output_dir = "out";
};

/// Parses flat `section.key = value` text. '#' starts a comment, blank
/// lines are ignored, later assignments win. The whole file is checked
/// before anything is computed from it.
PipelineConfig parse_config_text(const std::string& text,
                                 const std::string& name);
PipelineConfig parse_config_file(const std::string& path);

/// Empty when valid, otherwise the dotted name of the offending key.
std::string validate_config(const PipelineConfig& c);

/// Canonical serialization: every key in a fixed order, doubles through
/// format_double, optional keys only when set. The SHA-256 of this text is
/// the provenance id stamped on outputs that depend only on the config.
std::string canonical_config_text(const PipelineConfig& c);

/// Scan protocol implied by the config: amplitudes from the arm
/// transmission, inclusive phase grid from the bin count.
ScanConfig make_scan_config(const PipelineConfig& c);

/// SHA-256 of canonical_config_text(c).
std::string config_hash(const PipelineConfig& c);

/// Accepts "max_likelihood"/"ml" and "pattern_function"/"pattern".
bool method_from_name(const std::string& name, ReconstructionMethod& out);
const char* method_name(ReconstructionMethod m);

} // namespace ebitsim
