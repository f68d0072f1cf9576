#include <catch_amalgamated.hpp>

#include <cstdio>
#include <random>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "famcure/app.hpp"
#include "famcure/io.hpp"

using namespace famcure;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("famcure_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
    [[nodiscard]] std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

void write(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    os << content;
}

} // namespace

TEST_CASE("format_double round trips awkward values") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.678901234567, 2e4, -0.0, 6.0}) {
        const std::string s = format_double(v);
        REQUIRE(std::strtod(s.c_str(), nullptr) == v);
    }
    REQUIRE(format_double(6.0) == "6");
}

TEST_CASE("key/value document parse and serialize") {
    std::istringstream is(
        "# scenario\n"
        "n_families = 500\n"
        "baseline = weibull\n"
        "baseline_params = [8, 6]   # shape, scale\n"
        "\n"
        "p = 0.85\n");
    const auto doc = KeyValueDoc::parse(is, "cfg");
    REQUIRE(doc.get_num("n_families") == 500.0);
    REQUIRE(doc.get("baseline") == "weibull");
    REQUIRE(doc.get_array("baseline_params") == std::vector<double>{8.0, 6.0});
    REQUIRE(doc.get_num_or("missing", 7.0) == 7.0);
    REQUIRE_THROWS_WITH(doc.get("nope"), Catch::Matchers::ContainsSubstring("missing key"));

    KeyValueDoc out;
    out.set("a", "1");
    out.set_array("b", std::vector<double>{1.5, 2.5});
    std::istringstream back(out.serialize());
    const auto reparsed = KeyValueDoc::parse(back);
    REQUIRE(reparsed.get_num("a") == 1.0);
    REQUIRE(reparsed.get_array("b") == std::vector<double>{1.5, 2.5});

    std::istringstream bad("key_without_value\n");
    REQUIRE_THROWS_WITH(KeyValueDoc::parse(bad, "cfg"), Catch::Matchers::ContainsSubstring("cfg:1:"));
}

TEST_CASE("cli pipeline: simulate, fit, predict, evaluate") {
    TempDir dir;
    const std::string cfg = dir.file("s.cfg");
    write(cfg,
          "n_families = 400\nn_f = 5\nlambda_f = 0.8\ntheta = 0.5\np = 0.85\n"
          "baseline = weibull\nbaseline_params = [8, 6]\n");
    const std::string fam = dir.file("fam.csv");
    REQUIRE(cli::run({"simulate", "--config", cfg, "--seed", "42", "--out", fam}) == 0);

    // byte-identical reruns
    const std::string fam2 = dir.file("fam2.csv");
    REQUIRE(cli::run({"simulate", "--config", cfg, "--seed", "42", "--out", fam2}) == 0);
    REQUIRE(slurp(fam) == slurp(fam2));

    const std::string fit = dir.file("fit.txt");
    REQUIRE(cli::run({"fit", "--data", fam, "--model", "multivariate", "--baseline", "weibull",
                      "--seed", "1", "--out", fit, "--no-se"}) == 0);
    const auto fit_doc = KeyValueDoc::parse_file(fit);
    REQUIRE(fit_doc.get("model") == "multivariate");
    REQUIRE(fit_doc.get("converged") == "1");
    REQUIRE(fit_doc.get_num("p") > 0.5);

    const std::string pred = dir.file("pred.csv");
    REQUIRE(cli::run({"predict", "--data", fam, "--fit", fit, "--alpha", "0.05", "--out", pred}) == 0);
    std::ifstream ps(pred);
    std::string head;
    std::getline(ps, head);
    REQUIRE(head == "family_id,shape,rate,mean,median,score,class");

    const std::string eval = dir.file("eval.txt");
    REQUIRE(cli::run({"evaluate", "--pred", pred, "--truth", fam, "--theta-true", "0.5",
                      "--alpha", "0.05", "--out", eval}) == 0);
    const auto eval_doc = KeyValueDoc::parse_file(eval);
    REQUIRE(eval_doc.get_num("mspe") >= 0.0);
    REQUIRE(eval_doc.get_num("harrell_c") >= 0.0);
    REQUIRE(eval_doc.get_num("harrell_c") <= 1.0);
    REQUIRE(eval_doc.get_num("n_pairs_compared") > 0.0);
}

TEST_CASE("cli fit univariate and fh models run on simulated data") {
    TempDir dir;
    const std::string cfg = dir.file("s.cfg");
    write(cfg,
          "n_families = 500\nn_f = 5\nlambda_f = 0.8\ntheta = 0.5\np = 0.85\n"
          "baseline = weibull\nbaseline_params = [8, 6]\n");
    const std::string fam = dir.file("fam.csv");
    REQUIRE(cli::run({"simulate", "--config", cfg, "--seed", "11", "--out", fam}) == 0);

    const std::string ufit = dir.file("ufit.txt");
    const int urc = cli::run({"fit", "--data", fam, "--model", "univariate", "--baseline", "weibull",
                              "--seed", "1", "--out", ufit, "--no-se"});
    REQUIRE((urc == 0 || urc == 3));  // weakly identified at this size; report still written
    REQUIRE(KeyValueDoc::parse_file(ufit).get("model") == "univariate");

    const std::string ffit = dir.file("ffit.txt");
    const int frc = cli::run({"fit", "--data", fam, "--model", "fh", "--baseline", "weibull",
                              "--seed", "1", "--out", ffit, "--no-se"});
    REQUIRE((frc == 0 || frc == 3));
    const auto fdoc = KeyValueDoc::parse_file(ffit);
    REQUIRE(fdoc.get("model") == "fh");
    REQUIRE(fdoc.get_num("beta") > 0.0);
}

TEST_CASE("cli validate subcommand passes on a clean build") {
    REQUIRE(cli::run({"validate", "--cases", "30", "--seed", "5"}) == 0);
}

TEST_CASE("cli replicate emits tables and a machine report") {
    TempDir dir;
    const std::string out = dir.file("study.txt");
    REQUIRE(cli::run({"replicate", "--grid", "single", "--reps", "2", "--n-families", "250",
                      "--theta", "0.5", "--seed", "3", "--starts", "2", "--out", out}) == 0);
    const auto doc = KeyValueDoc::parse_file(out);
    REQUIRE(doc.get_num("reps") == 2.0);
    REQUIRE(doc.get("scenario0.grid") == "(5, 0.8)");
    REQUIRE(doc.get_array("scenario0.theta_hat").size() == 2);
}

TEST_CASE("cli error paths") {
    TempDir dir;
    // malformed config: parse error with the line number in the message
    const std::string cfg = dir.file("bad.cfg");
    write(cfg, "n_families 500\n");
    REQUIRE(cli::run({"simulate", "--config", cfg, "--seed", "1", "--out", dir.file("x.csv")}) == 2);

    // model/data mismatch: fh fit on a family without a main subject
    const std::string csv = dir.file("nomain.csv");
    write(csv, "family_id,subject_id,role,age,event\n0,0,sister,45,0\n0,1,mother,70,1\n");
    REQUIRE(cli::run({"fit", "--data", csv, "--model", "fh", "--baseline", "weibull", "--out",
                      dir.file("f.txt")}) == 2);

    // unknown subcommand
    REQUIRE(cli::run({"frobnicate"}) != 0);
    // missing required option
    REQUIRE(cli::run({"simulate", "--seed", "1"}) != 0);
}

TEST_CASE("env overrides for the seed") {
    TempDir dir;
    const std::string cfg = dir.file("s.cfg");
    write(cfg,
          "n_families = 50\nn_f = 3\nlambda_f = 0.8\ntheta = 0.5\np = 0.85\n"
          "baseline = weibull\nbaseline_params = [8, 6]\n");
    const std::string a = dir.file("a.csv");
    const std::string b = dir.file("b.csv");
    const std::string c = dir.file("c.csv");
    REQUIRE(cli::run({"simulate", "--config", cfg, "--seed", "1", "--out", a}) == 0);
    setenv("FAMCURE_SEED", "99", 1);
    REQUIRE(cli::run({"simulate", "--config", cfg, "--seed", "1", "--out", b}) == 0);
    unsetenv("FAMCURE_SEED");
    REQUIRE(cli::run({"simulate", "--config", cfg, "--seed", "99", "--out", c}) == 0);
    REQUIRE(slurp(b) == slurp(c));
    REQUIRE(slurp(a) != slurp(b));
}
