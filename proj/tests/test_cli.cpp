#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "../tools/cli.hpp"
#include "qelogit/dgp.hpp"
#include "qelogit/io.hpp"
#include "qelogit/mc.hpp"

namespace fs = std::filesystem;
using qelogit::cli::run;

namespace {

fs::path workdir() {
    const fs::path p = fs::temp_directory_path() / "qelogit_cli_tests";
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

std::string design_json(int n, int T, double gamma, std::uint64_t seed, int reps,
                        const std::string& family = "benchmark") {
    std::ostringstream os;
    os << "{\"family\":\"" << family << "\",\"n\":" << n << ",\"T\":" << T
       << ",\"gamma\":" << gamma << ",\"beta\":1.0,\"seed\":" << seed
       << ",\"replications\":" << reps << "}";
    return os.str();
}

}  // namespace

TEST_CASE("simulate is deterministic and validates its design") {
    const fs::path dir = workdir();
    spit(dir / "design.json", design_json(50, 3, 0.5, 42, 1));
    const std::string out1 = (dir / "panel1.csv").string();
    const std::string out2 = (dir / "panel2.csv").string();

    CHECK(run({"simulate", "--design", (dir / "design.json").string(), "--rep", "0",
               "--out", out1}) == 0);
    CHECK(run({"simulate", "--design", (dir / "design.json").string(), "--rep", "0",
               "--out", out2}) == 0);
    CHECK(slurp(out1) == slurp(out2));

    const std::string out3 = (dir / "panel3.csv").string();
    CHECK(run({"simulate", "--design", (dir / "design.json").string(), "--rep", "1",
               "--out", out3}) == 0);
    CHECK(slurp(out1) != slurp(out3));

    spit(dir / "bad_n.json", design_json(0, 3, 0.5, 42, 1));
    CHECK(run({"simulate", "--design", (dir / "bad_n.json").string(), "--out",
               (dir / "x.csv").string()}) == 1);

    spit(dir / "bad_family.json", design_json(10, 3, 0.5, 42, 1, "mystery"));
    CHECK(run({"simulate", "--design", (dir / "bad_family.json").string(), "--out",
               (dir / "x.csv").string()}) == 1);
}

TEST_CASE("fit reports estimates and honors the exit-code contract") {
    const fs::path dir = workdir();
    spit(dir / "fit_design.json", design_json(1000, 3, 0.5, 42, 1));
    const std::string data = (dir / "fit_panel.csv").string();
    REQUIRE(run({"simulate", "--design", (dir / "fit_design.json").string(), "--out", data}) == 0);

    SUBCASE("improved fit covers the generating value for this seed") {
        const std::string out = (dir / "fit.json").string();
        CHECK(run({"--format", "json", "--output", out, "fit", "--data", data, "--estimator",
                   "improved"}) == 0);
        const auto j = nlohmann::json::parse(slurp(out));
        CHECK(j["converged"] == true);
        bool found = false;
        for (const auto& p : j["parameters"]) {
            if (p["name"] == "gamma") {
                found = true;
                CHECK(p["ci_lower"].get<double>() < 0.5);
                CHECK(p["ci_upper"].get<double>() > 0.5);
            }
        }
        CHECK(found);
    }

    SUBCASE("a zero fixed expansion point equals the basic fit field for field") {
        const std::string a = (dir / "fit_basic.json").string();
        const std::string b = (dir / "fit_fixed0.json").string();
        CHECK(run({"--format", "json", "--output", a, "fit", "--data", data, "--estimator",
                   "basic"}) == 0);
        CHECK(run({"--format", "json", "--output", b, "fit", "--data", data, "--estimator",
                   "improved", "--fixed-beta-bar", "0"}) == 0);
        CHECK(slurp(a) == slurp(b));
    }

    SUBCASE("two-lag estimation demands the pre-sample row") {
        CHECK(run({"fit", "--data", data, "--estimator", "two-lag"}) == 1);
    }

    SUBCASE("unknown estimator and broken csv") {
        CHECK(run({"fit", "--data", data, "--estimator", "wat"}) == 1);
        spit(dir / "broken.csv", "id,time,y,x1\n1,0,2,0\n");
        CHECK(run({"fit", "--data", (dir / "broken.csv").string(), "--estimator", "basic"}) == 1);
    }

    SUBCASE("identification failure exits with 2") {
        // duplicate the covariate column so the pair is collinear
        std::stringstream src(slurp(data));
        qelogit::PanelDataset ds = qelogit::ingest_csv(src, "dup");
        ds.k = 2;
        ds.labels = {"x1", "x2"};
        for (auto& u : ds.units) {
            qelogit::Matrix X(static_cast<std::size_t>(ds.T), 2);
            for (int t = 0; t < ds.T; ++t) {
                X(t, 0) = u.X(t, 0);
                X(t, 1) = u.X(t, 0);
            }
            u.X = X;
            u.x0 = {u.x0[0], u.x0[0]};
        }
        const std::string dup = (dir / "dup.csv").string();
        qelogit::export_csv(ds, dup);
        CHECK(run({"fit", "--data", dup, "--estimator", "basic"}) == 2);
    }
}

TEST_CASE("two-lag fit runs on files with a pre-sample row") {
    const fs::path dir = workdir();
    qelogit::DesignSpec spec;
    spec.family = qelogit::DesignFamily::Benchmark;
    spec.n = 800;
    spec.T = 5;
    spec.gamma = 0.5;
    spec.seed = 4242;
    spec.replications = 1;
    const qelogit::PanelDataset shifted =
        qelogit::with_lag2_initials(qelogit::generate(spec, 0));
    const std::string path = (dir / "lag2.csv").string();
    qelogit::export_csv(shifted, path);

    const std::string out = (dir / "lag2.json").string();
    CHECK(run({"--format", "json", "--output", out, "fit", "--data", path, "--estimator",
               "two-lag"}) == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    CHECK(j["parameters"].size() == 3);
    CHECK(j["parameters"][2]["name"] == "gamma2");
}

TEST_CASE("replicate writes matching aggregate and per-rep files") {
    const fs::path dir = workdir();
    spit(dir / "rep_design.json", design_json(120, 3, 0.5, 7, 6));
    const std::string agg = (dir / "rows.csv").string();

    CHECK(run({"--threads", "2", "--output", agg, "replicate", "--design",
               (dir / "rep_design.json").string(), "--estimators", "basic,improved"}) == 0);
    CHECK(fs::exists(agg));
    CHECK(fs::exists(agg + ".reps.csv"));

    std::ifstream in(agg);
    const auto rows = qelogit::read_metrics_csv(in);
    CHECK(rows.size() == 4);

    // same seed, different worker count: byte-identical aggregates
    const std::string agg1 = (dir / "rows_t1.csv").string();
    CHECK(run({"--threads", "1", "--output", agg1, "replicate", "--design",
               (dir / "rep_design.json").string(), "--estimators", "basic,improved"}) == 0);
    CHECK(slurp(agg) == slurp(agg1));

    // reps override
    const std::string agg2 = (dir / "rows_r3.csv").string();
    CHECK(run({"--output", agg2, "replicate", "--design", (dir / "rep_design.json").string(),
               "--estimators", "basic", "--reps", "3"}) == 0);
    std::ifstream in2(agg2);
    const auto rows2 = qelogit::read_metrics_csv(in2);
    REQUIRE(rows2.size() == 2);
    CHECK(rows2[0].replications_used + rows2[0].failures == 3);
}

TEST_CASE("compare validates designs and emits reductions") {
    const fs::path dir = workdir();
    spit(dir / "cmp_design.json", design_json(150, 3, 0.5, 77, 5));
    const std::string left = (dir / "left.csv").string();
    const std::string right = (dir / "right.csv").string();
    REQUIRE(run({"--output", left, "replicate", "--design", (dir / "cmp_design.json").string(),
                 "--estimators", "basic"}) == 0);
    REQUIRE(run({"--output", right, "replicate", "--design", (dir / "cmp_design.json").string(),
                 "--estimators", "improved"}) == 0);

    const std::string cmp = (dir / "cmp.csv").string();
    CHECK(run({"--format", "csv", "--output", cmp, "compare", "--left", left, "--right",
               right}) == 0);
    const std::string text = slurp(cmp);
    CHECK(text.find("mae_reduction") != std::string::npos);
    CHECK(text.find("gamma") != std::string::npos);

    spit(dir / "cmp_design2.json", design_json(151, 3, 0.5, 77, 5));
    const std::string other = (dir / "other.csv").string();
    REQUIRE(run({"--output", other, "replicate", "--design", (dir / "cmp_design2.json").string(),
                 "--estimators", "improved"}) == 0);
    CHECK(run({"compare", "--left", left, "--right", other}) == 1);
}

TEST_CASE("usage errors exit nonzero") {
    CHECK(run({"fit"}) == 1);                       // missing required options
    CHECK(run({}) == 1);                            // missing subcommand
    CHECK(run({"--format", "yaml", "fit"}) == 1);   // bad enum
}
