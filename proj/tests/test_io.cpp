#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "ebitsim/ebit.hpp"
#include "ebitsim/io.hpp"
#include "ebitsim/sha256.hpp"
#include "ebitsim/wigner.hpp"

using namespace ebitsim;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        static int counter = 0;
        auto stamp = std::chrono::steady_clock::now().time_since_epoch();
        path = std::filesystem::temp_directory_path() /
               ("ebitsim-io-" + std::to_string(stamp.count()) + "-" +
                std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const {
        return (path / name).string();
    }
};

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

bool bit_equal(double a, double b) {
    return std::memcmp(&a, &b, sizeof a) == 0;
}

} // namespace

TEST_SUITE("io") {

TEST_CASE("canonical decimal form reparses to the identical double") {
    const double values[] = {0.1,
                             1.0 / 3.0,
                             M_PI,
                             1e-300,
                             5e-324,
                             1.7976931348623157e308,
                             0.0,
                             -0.0,
                             -123456789.123456789,
                             2.2250738585072014e-308};
    for (double v : values) {
        std::string s = format_double(v);
        double back = std::strtod(s.c_str(), nullptr);
        CAPTURE(s);
        CHECK(bit_equal(v, back));
    }
}

TEST_CASE("hash matches the published test vectors") {
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("The quick brown fox jumps over the lazy dog") ==
          "d7a8fbb307d7809469ca9abcb0082e4f8d5651e46d3cdb762d02d0bf37c9e592");
    CHECK(sha256_hex(
              "abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
    CHECK(sha256_hex(std::string(1000000, 'a')) ==
          "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");

    TempDir tmp;
    spit(tmp.file("blob.bin"), "abc");
    CHECK(file_sha256(tmp.file("blob.bin")) == sha256_hex("abc"));
    CHECK_THROWS(file_sha256(tmp.file("missing.bin")));
}

TEST_CASE("sample files round trip bit for bit") {
    TempDir tmp;
    std::vector<QuadratureSample> samples = {
        {0.0, 0.1 + 0.2, -1.0 / 3.0, 0.5},
        {M_PI, -1e-15, 2.25, -0.75},
        {1.5707963267948966, 0.0, -0.0, 1e300},
        {0.1, 1e-308, -4.9406564584124654e-324, 0.25},
    };
    SampleFileMeta meta;
    meta.generator = "splitmix64-boxmuller";
    meta.seed = 987654321;
    meta.eta = 0.605;
    meta.alpha = 1.0 / std::sqrt(2.0);
    meta.beta = meta.alpha;
    meta.n_samples = std::int64_t(samples.size());
    meta.phi_state = 0.25;
    meta.bins = 4;
    meta.vacuum = true;
    meta.input_sha256 = sha256_hex("pretend config");

    write_samples(tmp.file("s.csv"), samples, meta);
    SampleFileMeta back;
    auto loaded = read_samples(tmp.file("s.csv"), &back);
    REQUIRE(loaded.size() == samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        CHECK(bit_equal(loaded[i].chi, samples[i].chi));
        CHECK(bit_equal(loaded[i].x1, samples[i].x1));
        CHECK(bit_equal(loaded[i].x2, samples[i].x2));
        CHECK(bit_equal(loaded[i].x_vac, samples[i].x_vac));
    }
    CHECK(back.generator == meta.generator);
    CHECK(back.seed == meta.seed);
    CHECK(bit_equal(back.eta, meta.eta));
    CHECK(bit_equal(back.alpha, meta.alpha));
    CHECK(back.n_samples == meta.n_samples);
    CHECK(bit_equal(back.phi_state, meta.phi_state));
    CHECK(back.bins == meta.bins);
    CHECK(back.vacuum == meta.vacuum);
    CHECK(back.input_sha256 == meta.input_sha256);

    // writing the same content twice gives identical bytes
    write_samples(tmp.file("s2.csv"), samples, meta);
    CHECK(file_sha256(tmp.file("s.csv")) == file_sha256(tmp.file("s2.csv")));
}

TEST_CASE("density files round trip exactly and rewrite identically") {
    TempDir tmp;
    FockTruncation trunc(4);
    auto rho = heralded_state(
        make_ebit(0.6, 0.8, 1.1, trunc), 0.73);
    write_density(tmp.file("rho.txt"), rho, sha256_hex("src"));
    auto back = read_density(tmp.file("rho.txt"));
    CHECK(back.trunc() == trunc);
    CHECK((back.elements() - rho.elements()).cwiseAbs().maxCoeff() == 0.0);

    write_density(tmp.file("rho2.txt"), rho, sha256_hex("src"));
    CHECK(file_sha256(tmp.file("rho.txt")) ==
          file_sha256(tmp.file("rho2.txt")));

    auto text = slurp(tmp.file("rho.txt"));
    CHECK(text.find("n_max=4 layout=row-major") != std::string::npos);
    CHECK(text.find("# input_sha256=") != std::string::npos);
}

TEST_CASE("ket files carry the layout header") {
    TempDir tmp;
    FockTruncation trunc(2);
    auto ket = make_ebit(1.0, 0.0, 0.0, trunc);
    write_ket(tmp.file("ket.txt"), ket, "");
    auto text = slurp(tmp.file("ket.txt"));
    CHECK(text.find("n_max=2 layout=row-major") != std::string::npos);
}

TEST_CASE("malformed data files name the offending line") {
    TempDir tmp;

    spit(tmp.file("bad.csv"),
         "# generator=g seed=1 eta=0.5 alpha=0.7 beta=0.7 n_samples=2 "
         "phi_state=0 bins=1 vacuum=1\n"
         "chi_rad,x1,x2,x_vac\n"
         "0,0.1,0.2,0.3\n"
         "0,not,a,number\n");
    try {
        read_samples(tmp.file("bad.csv"));
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find(":4") != std::string::npos);
    }

    spit(tmp.file("nohdr.csv"), "0,0.1,0.2,0.3\n");
    CHECK_THROWS_AS(read_samples(tmp.file("nohdr.csv")), IoError);
    CHECK_THROWS_AS(read_samples(tmp.file("missing.csv")), IoError);

    spit(tmp.file("layout.txt"),
         "n_max=2 layout=column-major\n0,0,0,0,1,0\n");
    CHECK_THROWS_AS(read_density(tmp.file("layout.txt")), IoError);

    std::string rho_head = "n_max=1 layout=row-major\n";
    std::string row = "0,0,0,0,1,0\n";
    spit(tmp.file("dup.txt"), rho_head + row + row);
    CHECK_THROWS_AS(read_density(tmp.file("dup.txt")), IoError);

    spit(tmp.file("range.txt"), rho_head + "0,0,0,5,1,0\n");
    CHECK_THROWS_AS(read_density(tmp.file("range.txt")), IoError);

    spit(tmp.file("short.txt"), rho_head + row);
    try {
        read_density(tmp.file("short.txt"));
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("truncated") != std::string::npos);
    }

    // non-Hermitian input is rejected through the matrix constructor
    spit(tmp.file("nonherm.txt"), rho_head +
                                      "0,0,0,0,0.5,0\n"
                                      "0,0,0,1,0.3,0\n"
                                      "0,1,0,0,0.1,0\n"
                                      "0,1,0,1,0.5,0\n"
                                      "1,0,1,0,0,0\n"
                                      "1,0,1,1,0,0\n"
                                      "1,1,1,0,0,0\n"
                                      "1,1,1,1,0,0\n"
                                      "0,0,1,0,0,0\n"
                                      "0,0,1,1,0,0\n"
                                      "0,1,1,0,0,0\n"
                                      "0,1,1,1,0,0\n"
                                      "1,0,0,0,0,0\n"
                                      "1,0,0,1,0,0\n"
                                      "1,1,0,0,0,0\n"
                                      "1,1,0,1,0,0\n");
    CHECK_THROWS_AS(read_density(tmp.file("nonherm.txt")), IoError);
}

TEST_CASE("config text parses with comments, reassignment, diagnostics") {
    auto cfg = parse_config_text("# comment line\n"
                                 "experiment.efficiency = 0.7\n"
                                 "scan.n_samples = 5000   # trailing\n"
                                 "scan.n_phase_bins = 10\n"
                                 "experiment.efficiency = 0.8\n"
                                 "reconstruction.method = pattern\n",
                                 "cfg");
    CHECK(cfg.experiment.efficiency == 0.8); // later assignment wins
    CHECK(cfg.n_samples == 5000);
    CHECK(cfg.n_phase_bins == 10);
    CHECK(cfg.reconstruction.method == ReconstructionMethod::pattern_function);

    auto expect_fail = [](const std::string& text, const char* needle) {
        try {
            parse_config_text(text, "cfg");
            FAIL_CHECK("expected ConfigError for: " << needle);
        } catch (const ConfigError& e) {
            CAPTURE(e.what());
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    expect_fail("scan.n_samples = 10\nbogus.key = 1\n", "cfg:2");
    expect_fail("scan.n_samples = ten\n", "integer");
    expect_fail("experiment.efficiency 0.5\n", "section.key");
    expect_fail("scan.n_samples =\n", "missing value");
    expect_fail("reconstruction.method = magic\n", "unknown method");

    CHECK_THROWS_AS(parse_config_file("/nonexistent/path.cfg"), IoError);
}

TEST_CASE("semantic validation names the dotted key") {
    PipelineConfig c;
    CHECK(validate_config(c).empty());
    c.experiment.efficiency = 1.2;
    CHECK(validate_config(c) == "experiment.efficiency");
    c = {};
    c.n_phase_bins = 0;
    CHECK(validate_config(c) == "scan.n_phase_bins");
    c = {};
    c.n_samples = 1001;
    c.n_phase_bins = 10;
    CHECK(validate_config(c).find("divisible") != std::string::npos);
    c = {};
    c.reconstruction.n_max = 0;
    CHECK(validate_config(c).find("reconstruction.n_max") !=
          std::string::npos);
    c = {};
    c.output_dir.clear();
    CHECK(validate_config(c) == "output.dir");
}

TEST_CASE("canonical form is a fixed point and skips the output dir") {
    PipelineConfig c;
    c.experiment.arm_transmission = 0.7;
    c.seed = 7;
    std::string canon = canonical_config_text(c);
    auto reparsed = parse_config_text(canon, "canon");
    CHECK(canonical_config_text(reparsed) == canon);
    CHECK(canon.find("scan.seed = 7") != std::string::npos);
    CHECK(canon.find("output.dir") == std::string::npos);

    PipelineConfig moved = c;
    moved.output_dir = "elsewhere";
    CHECK(config_hash(moved) == config_hash(c));

    PipelineConfig reseeded = c;
    reseeded.seed = 8;
    CHECK(config_hash(reseeded) != config_hash(c));

    // optional keys appear only when set
    CHECK(canon.find("phi_rad") == std::string::npos);
    c.experiment.phi_rad = 0.5;
    CHECK(canonical_config_text(c).find("experiment.phi_rad = 0.5") !=
          std::string::npos);
}

TEST_CASE("grid and report files carry provenance headers") {
    TempDir tmp;
    AxisSpec ax{-1.0, 1.0, 3};
    auto grid = export_section_analytic(Section::x1x2, ax, ax, 0.0, 0.0,
                                        0.3, 0.9);
    write_wigner_grid(tmp.file("grid.csv"), grid, sha256_hex("cfg"));
    auto text = slurp(tmp.file("grid.csv"));
    CHECK(text.find("# section=x1x2") != std::string::npos);
    CHECK(text.find("# input_sha256=") != std::string::npos);
    CHECK(text.find("axis1,axis2,value") != std::string::npos);
    // header comments, column row, then 9 data rows
    CHECK(std::count(text.begin(), text.end(), '\n') >= 11);

    write_report(tmp.file("rep.txt"),
                 {{"alpha", "1"}, {"beta", format_double(0.25)}},
                 sha256_hex("data"));
    auto rep = slurp(tmp.file("rep.txt"));
    CHECK(rep.find("alpha=1") != std::string::npos);
    CHECK(rep.find("beta=0.25") != std::string::npos);
    CHECK(rep.find("# input_sha256=") != std::string::npos);
    CHECK(rep.find("alpha") < rep.find("beta")); // order preserved
}

TEST_CASE("scan configuration derives from the pipeline settings") {
    PipelineConfig c;
    c.experiment.arm_transmission = 0.7;
    c.experiment.efficiency = 0.9;
    c.n_samples = 4000;
    c.n_phase_bins = 4;
    c.seed = 99;
    c.include_vacuum_bin = false;
    auto sc = make_scan_config(c);
    CHECK(sc.n_samples == 4000);
    CHECK(sc.phase_grid.size() == 4);
    CHECK(sc.eta == 0.9);
    auto [a, b] = arm_loss_amplitudes(0.7);
    CHECK(sc.alpha == a);
    CHECK(sc.beta == b);
    CHECK(sc.seed == 99);
    CHECK_FALSE(sc.include_vacuum_bin);
}

TEST_CASE("method names round trip") {
    ReconstructionMethod m;
    REQUIRE(method_from_name("max_likelihood", m));
    CHECK(m == ReconstructionMethod::max_likelihood);
    REQUIRE(method_from_name("ml", m));
    CHECK(m == ReconstructionMethod::max_likelihood);
    REQUIRE(method_from_name("pattern_function", m));
    CHECK(m == ReconstructionMethod::pattern_function);
    REQUIRE(method_from_name("pattern", m));
    CHECK(m == ReconstructionMethod::pattern_function);
    CHECK_FALSE(method_from_name("psychic", m));
    CHECK(std::string(method_name(ReconstructionMethod::max_likelihood)) ==
          "max_likelihood");
    CHECK(std::string(method_name(ReconstructionMethod::pattern_function)) ==
          "pattern_function");
}

} // TEST_SUITE
