#include "ebitsim/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ebitsim/sha256.hpp"

namespace ebitsim {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError(path + ": cannot open for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out)
        throw IoError(path + ": write failed");
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError(path + ": cannot open");
    std::string data((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return data;
}

void rstrip(std::string& s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' ||
                          s.back() == '\t' || s.back() == '\n'))
        s.pop_back();
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

/// Splits "# key=value key=value ..." comment content into pairs.
void parse_meta_tokens(const std::string& comment, SampleFileMeta& meta) {
    std::istringstream tok(comment);
    std::string item;
    while (tok >> item) {
        std::size_t eq = item.find('=');
        if (eq == std::string::npos)
            continue;
        std::string key = item.substr(0, eq);
        std::string val = item.substr(eq + 1);
        try {
            if (key == "generator")
                meta.generator = val;
            else if (key == "seed")
                meta.seed = std::stoull(val);
            else if (key == "eta")
                meta.eta = std::stod(val);
            else if (key == "alpha")
                meta.alpha = std::stod(val);
            else if (key == "beta")
                meta.beta = std::stod(val);
            else if (key == "n_samples")
                meta.n_samples = std::stoll(val);
            else if (key == "phi_state")
                meta.phi_state = std::stod(val);
            else if (key == "bins")
                meta.bins = std::stoi(val);
            else if (key == "vacuum")
                meta.vacuum = (val != "0");
            else if (key == "input_sha256")
                meta.input_sha256 = val;
        } catch (const std::exception&) {
            // metadata is advisory; a bad token is ignored, not fatal
        }
    }
}

} // namespace

void write_samples(const std::string& path,
                   const std::vector<QuadratureSample>& samples,
                   const SampleFileMeta& meta) {
    std::string text;
    text.reserve(samples.size() * 80 + 256);
    text += "# generator=" + meta.generator +
            " seed=" + std::to_string(meta.seed) +
            " eta=" + format_double(meta.eta) +
            " alpha=" + format_double(meta.alpha) +
            " beta=" + format_double(meta.beta) +
            " n_samples=" + std::to_string(meta.n_samples) +
            " phi_state=" + format_double(meta.phi_state) +
            " bins=" + std::to_string(meta.bins) +
            " vacuum=" + (meta.vacuum ? std::string("1") : std::string("0")) +
            "\n";
    if (!meta.input_sha256.empty())
        text += "# input_sha256=" + meta.input_sha256 + "\n";
    text += "chi_rad,x1,x2,x_vac\n";
    char line[160];
    for (const auto& s : samples) {
        int n = std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g\n",
                              s.chi, s.x1, s.x2, s.x_vac);
        text.append(line, static_cast<std::size_t>(n));
    }
    write_text(path, text);
}

std::vector<QuadratureSample> read_samples(const std::string& path,
                                           SampleFileMeta* meta) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError(path + ": cannot open");
    SampleFileMeta m;
    std::vector<QuadratureSample> samples;
    std::string line;
    long line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        rstrip(line);
        if (line.empty())
            continue;
        if (line[0] == '#') {
            parse_meta_tokens(line.substr(1), m);
            continue;
        }
        if (!header_seen) {
            if (line != "chi_rad,x1,x2,x_vac")
                throw IoError(path + ":" + std::to_string(line_no) +
                              ": expected header chi_rad,x1,x2,x_vac, got '" +
                              line + "'");
            header_seen = true;
            if (m.n_samples > 0)
                samples.reserve(static_cast<std::size_t>(m.n_samples));
            continue;
        }
        QuadratureSample s;
        int used = 0;
        if (std::sscanf(line.c_str(), "%lf ,%lf ,%lf ,%lf%n", &s.chi, &s.x1,
                        &s.x2, &s.x_vac, &used) != 4 ||
            used != static_cast<int>(line.size()))
            throw IoError(path + ":" + std::to_string(line_no) +
                          ": malformed sample record '" + line + "'");
        samples.push_back(s);
    }
    if (!header_seen)
        throw IoError(path + ": no header line found");
    if (samples.empty())
        throw IoError(path + ": no sample records");
    if (meta)
        *meta = m;
    return samples;
}

void write_density(const std::string& path, const DensityMatrix& rho,
                   const std::string& input_sha256) {
    const auto& t = rho.trunc();
    std::string text;
    text.reserve(static_cast<std::size_t>(t.dim()) * t.dim() * 60 + 128);
    if (!input_sha256.empty())
        text += "# input_sha256=" + input_sha256 + "\n";
    text += "n_max=" + std::to_string(t.n_max) + " layout=row-major\n";
    char line[192];
    for (int k = 0; k <= t.n_max; ++k)
        for (int l = 0; l <= t.n_max; ++l)
            for (int m = 0; m <= t.n_max; ++m)
                for (int n = 0; n <= t.n_max; ++n) {
                    complexd v = rho.element(k, l, m, n);
                    int len = std::snprintf(line, sizeof line,
                                            "%d,%d,%d,%d,%.17g,%.17g\n", k, l,
                                            m, n, v.real(), v.imag());
                    text.append(line, static_cast<std::size_t>(len));
                }
    write_text(path, text);
}

DensityMatrix read_density(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError(path + ": cannot open");
    std::string line;
    long line_no = 0;
    int n_max = -1;
    while (std::getline(in, line)) {
        ++line_no;
        rstrip(line);
        if (line.empty() || line[0] == '#')
            continue;
        char layout[32] = {0};
        if (std::sscanf(line.c_str(), "n_max=%d layout=%31s", &n_max,
                        layout) != 2 ||
            std::strcmp(layout, "row-major") != 0 || n_max < 1)
            throw IoError(path + ":" + std::to_string(line_no) +
                          ": expected 'n_max=<k> layout=row-major', got '" +
                          line + "'");
        break;
    }
    if (n_max < 1)
        throw IoError(path + ": missing n_max header line");
    FockTruncation trunc(n_max);
    Eigen::MatrixXcd elems = Eigen::MatrixXcd::Zero(trunc.dim(), trunc.dim());
    Eigen::MatrixXi seen = Eigen::MatrixXi::Zero(trunc.dim(), trunc.dim());
    long count = 0;
    while (std::getline(in, line)) {
        ++line_no;
        rstrip(line);
        if (line.empty() || line[0] == '#')
            continue;
        int k, l, m, n, used = 0;
        double re, im;
        if (std::sscanf(line.c_str(), "%d ,%d ,%d ,%d ,%lf ,%lf%n", &k, &l, &m,
                        &n, &re, &im, &used) != 6 ||
            used != static_cast<int>(line.size()))
            throw IoError(path + ":" + std::to_string(line_no) +
                          ": malformed element record '" + line + "'");
        if (k < 0 || k > n_max || l < 0 || l > n_max || m < 0 || m > n_max ||
            n < 0 || n > n_max)
            throw IoError(path + ":" + std::to_string(line_no) +
                          ": index out of range for n_max=" +
                          std::to_string(n_max));
        int row = trunc.flat(k, l), col = trunc.flat(m, n);
        if (seen(row, col)++)
            throw IoError(path + ":" + std::to_string(line_no) +
                          ": duplicate element (" + std::to_string(k) + "," +
                          std::to_string(l) + "," + std::to_string(m) + "," +
                          std::to_string(n) + ")");
        elems(row, col) = complexd(re, im);
        ++count;
    }
    long expect = static_cast<long>(trunc.dim()) * trunc.dim();
    if (count != expect)
        throw IoError(path + ": truncated file, " + std::to_string(count) +
                      " of " + std::to_string(expect) + " elements present");
    try {
        return DensityMatrix(trunc, std::move(elems));
    } catch (const std::invalid_argument& e) {
        throw IoError(path + ": " + e.what());
    }
}

void write_ket(const std::string& path, const TwoModeKet& ket,
               const std::string& input_sha256) {
    const auto& t = ket.trunc;
    std::string text;
    if (!input_sha256.empty())
        text += "# input_sha256=" + input_sha256 + "\n";
    text += "n_max=" + std::to_string(t.n_max) + " layout=row-major\n";
    char line[96];
    for (int k = 0; k <= t.n_max; ++k)
        for (int l = 0; l <= t.n_max; ++l) {
            complexd v = ket.amplitudes(t.flat(k, l));
            int len = std::snprintf(line, sizeof line, "%d,%d,%.17g,%.17g\n",
                                    k, l, v.real(), v.imag());
            text.append(line, static_cast<std::size_t>(len));
        }
    write_text(path, text);
}

void write_wigner_grid(const std::string& path, const WignerGrid& grid,
                       const std::string& input_sha256) {
    std::string text;
    text.reserve(static_cast<std::size_t>(grid.axis1.count) *
                     grid.axis2.count * 48 +
                 256);
    text += std::string("# section=") + section_name(grid.section) +
            " phi=" + format_double(grid.phi) +
            " eta=" + format_double(grid.eta) +
            " fixed=" + format_double(grid.fixed1) + "," +
            format_double(grid.fixed2) + "\n";
    if (!input_sha256.empty())
        text += "# input_sha256=" + input_sha256 + "\n";
    text += "axis1,axis2,value\n";
    char line[128];
    for (int i = 0; i < grid.axis1.count; ++i) {
        double a1 = axis_value(grid.axis1, i);
        for (int j = 0; j < grid.axis2.count; ++j) {
            double a2 = axis_value(grid.axis2, j);
            int len = std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n",
                                    a1, a2, grid.values(i, j));
            text.append(line, static_cast<std::size_t>(len));
        }
    }
    write_text(path, text);
}

void write_report(const std::string& path,
                  const std::vector<std::pair<std::string, std::string>>& rows,
                  const std::string& input_sha256) {
    std::string text;
    if (!input_sha256.empty())
        text += "# input_sha256=" + input_sha256 + "\n";
    for (const auto& [key, value] : rows)
        text += key + "=" + value + "\n";
    write_text(path, text);
}

// ----------------------------------------------------------- config file

namespace {

[[noreturn]] void config_fail(const std::string& name, long line_no,
                              const std::string& what) {
    throw ConfigError(name + ":" + std::to_string(line_no) + ": " + what);
}

double parse_double_value(const std::string& name, long line_no,
                          const std::string& val) {
    const char* s = val.c_str();
    char* end = nullptr;
    double v = std::strtod(s, &end);
    if (end == s || *end != '\0')
        config_fail(name, line_no, "expected a number, got '" + val + "'");
    return v;
}

long long parse_int_value(const std::string& name, long line_no,
                          const std::string& val) {
    const char* s = val.c_str();
    char* end = nullptr;
    long long v = std::strtoll(s, &end, 10);
    if (end == s || *end != '\0')
        config_fail(name, line_no, "expected an integer, got '" + val + "'");
    return v;
}

bool parse_bool_value(const std::string& name, long line_no,
                      const std::string& val) {
    if (val == "true" || val == "1")
        return true;
    if (val == "false" || val == "0")
        return false;
    config_fail(name, line_no, "expected true/false, got '" + val + "'");
}

} // namespace

bool method_from_name(const std::string& name, ReconstructionMethod& out) {
    if (name == "max_likelihood" || name == "ml") {
        out = ReconstructionMethod::max_likelihood;
        return true;
    }
    if (name == "pattern_function" || name == "pattern") {
        out = ReconstructionMethod::pattern_function;
        return true;
    }
    return false;
}

const char* method_name(ReconstructionMethod m) {
    return m == ReconstructionMethod::max_likelihood ? "max_likelihood"
                                                     : "pattern_function";
}

PipelineConfig parse_config_text(const std::string& text,
                                 const std::string& name) {
    PipelineConfig c;
    std::istringstream in(text);
    std::string raw;
    long line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::size_t hash = raw.find('#');
        if (hash != std::string::npos)
            raw.erase(hash);
        std::string line = trim(raw);
        if (line.empty())
            continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            config_fail(name, line_no, "expected 'section.key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty())
            config_fail(name, line_no, "missing key before '='");
        if (val.empty())
            config_fail(name, line_no, "missing value for '" + key + "'");

        if (key == "experiment.pump_wavelength_m")
            c.experiment.pump_wavelength_m =
                parse_double_value(name, line_no, val);
        else if (key == "experiment.pulse_separation_s")
            c.experiment.pulse_separation_s =
                parse_double_value(name, line_no, val);
        else if (key == "experiment.interferometer_delay_s")
            c.experiment.interferometer_delay_s =
                parse_double_value(name, line_no, val);
        else if (key == "experiment.arm_transmission")
            c.experiment.arm_transmission =
                parse_double_value(name, line_no, val);
        else if (key == "experiment.efficiency")
            c.experiment.efficiency = parse_double_value(name, line_no, val);
        else if (key == "experiment.idler_bandwidth_hz")
            c.experiment.idler_bandwidth_hz =
                parse_double_value(name, line_no, val);
        else if (key == "experiment.phi_rad")
            c.experiment.phi_rad = parse_double_value(name, line_no, val);
        else if (key == "scan.n_samples")
            c.n_samples = parse_int_value(name, line_no, val);
        else if (key == "scan.n_phase_bins")
            c.n_phase_bins =
                static_cast<int>(parse_int_value(name, line_no, val));
        else if (key == "scan.seed")
            c.seed = static_cast<std::uint64_t>(
                parse_int_value(name, line_no, val));
        else if (key == "scan.include_vacuum_bin")
            c.include_vacuum_bin = parse_bool_value(name, line_no, val);
        else if (key == "reconstruction.n_max")
            c.reconstruction.n_max =
                static_cast<int>(parse_int_value(name, line_no, val));
        else if (key == "reconstruction.method") {
            if (!method_from_name(val, c.reconstruction.method))
                config_fail(name, line_no,
                            "unknown method '" + val +
                                "' (max_likelihood or pattern_function)");
        } else if (key == "reconstruction.max_iterations")
            c.reconstruction.max_iterations =
                static_cast<int>(parse_int_value(name, line_no, val));
        else if (key == "reconstruction.convergence_tol")
            c.reconstruction.convergence_tol =
                parse_double_value(name, line_no, val);
        else if (key == "reconstruction.quadrature_points")
            c.reconstruction.quadrature_points =
                static_cast<int>(parse_int_value(name, line_no, val));
        else if (key == "reconstruction.quadrature_halfwidth")
            c.reconstruction.quadrature_halfwidth =
                parse_double_value(name, line_no, val);
        else if (key == "output.dir")
            c.output_dir = val;
        else
            config_fail(name, line_no, "unknown key '" + key + "'");
    }
    return c;
}

PipelineConfig parse_config_file(const std::string& path) {
    return parse_config_text(read_text(path), path);
}

std::string validate_config(const PipelineConfig& c) {
    std::string err = validate_params(c.experiment);
    if (!err.empty())
        return "experiment." + err;
    if (c.n_samples < 1)
        return "scan.n_samples";
    if (c.n_phase_bins < 1)
        return "scan.n_phase_bins";
    if (c.n_samples % c.n_phase_bins != 0)
        return "scan.n_samples (not divisible by scan.n_phase_bins)";
    err = validate_reconstruction(c.reconstruction);
    if (!err.empty())
        return "reconstruction." + err;
    if (c.output_dir.empty())
        return "output.dir";
    return {};
}

std::string canonical_config_text(const PipelineConfig& c) {
    // output.dir is deliberately absent: where a file lands must not change
    // its bytes, or re-running in a scratch directory would break the
    // determinism contract.
    std::string text;
    const auto& e = c.experiment;
    text += "experiment.pump_wavelength_m = " +
            format_double(e.pump_wavelength_m) + "\n";
    text += "experiment.pulse_separation_s = " +
            format_double(e.pulse_separation_s) + "\n";
    text += "experiment.interferometer_delay_s = " +
            format_double(e.interferometer_delay_s) + "\n";
    text += "experiment.arm_transmission = " +
            format_double(e.arm_transmission) + "\n";
    text += "experiment.efficiency = " + format_double(e.efficiency) + "\n";
    if (e.idler_bandwidth_hz)
        text += "experiment.idler_bandwidth_hz = " +
                format_double(*e.idler_bandwidth_hz) + "\n";
    if (e.phi_rad)
        text += "experiment.phi_rad = " + format_double(*e.phi_rad) + "\n";
    text += "scan.n_samples = " + std::to_string(c.n_samples) + "\n";
    text += "scan.n_phase_bins = " + std::to_string(c.n_phase_bins) + "\n";
    text += "scan.seed = " + std::to_string(c.seed) + "\n";
    text += std::string("scan.include_vacuum_bin = ") +
            (c.include_vacuum_bin ? "true" : "false") + "\n";
    const auto& r = c.reconstruction;
    text += "reconstruction.n_max = " + std::to_string(r.n_max) + "\n";
    text += std::string("reconstruction.method = ") + method_name(r.method) +
            "\n";
    text += "reconstruction.max_iterations = " +
            std::to_string(r.max_iterations) + "\n";
    text += "reconstruction.convergence_tol = " +
            format_double(r.convergence_tol) + "\n";
    text += "reconstruction.quadrature_points = " +
            std::to_string(r.quadrature_points) + "\n";
    text += "reconstruction.quadrature_halfwidth = " +
            format_double(r.quadrature_halfwidth) + "\n";
    return text;
}

ScanConfig make_scan_config(const PipelineConfig& c) {
    ScanConfig s;
    s.n_samples = c.n_samples;
    s.phase_grid = default_phase_grid(c.n_phase_bins);
    s.eta = c.experiment.efficiency;
    auto [a, b] = arm_loss_amplitudes(c.experiment.arm_transmission);
    s.alpha = a;
    s.beta = b;
    s.seed = c.seed;
    s.include_vacuum_bin = c.include_vacuum_bin;
    return s;
}

std::string config_hash(const PipelineConfig& c) {
    return sha256_hex(canonical_config_text(c));
}

} // namespace ebitsim
