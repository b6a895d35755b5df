#include "cli.hpp"

#include "ckme/classifier.hpp"
#include "ckme/rff.hpp"
#include "support.hpp"

#include <iostream>
#include <sstream>

using namespace ckme;
using test::slurp;
using test::TempDir;
using test::write_text;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ckme");
  std::ostringstream out, err;
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  const int code = cli::run(args);
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  return {code, out.str(), err.str()};
}

const char* kSmallSpec =
    "dim=2\nsets_per_class=6\ncells_per_set=200\nseed=4\n"
    "component.case=0,0|1,1|0.1\ncomponent.case=4,0|1,1|0.9\n"
    "component.ctrl=0,0|1,1|0.9\ncomponent.ctrl=4,0|1,1|0.1\n";

const std::vector<std::string> kFast{"--D", "200", "--m", "40", "--folds", "3", "--runs", "2", "--reg-c", "100"};

std::vector<std::string> with_fast(std::vector<std::string> args) {
  args.insert(args.end(), kFast.begin(), kFast.end());
  return args;
}

}  // namespace

TEST_CASE("synth writes a reproducible dataset") {
  TempDir dir("cli_synth");
  write_text(dir / "small.spec", kSmallSpec);
  const auto a = run_cli({"synth", "--spec", (dir / "small.spec").string(), "--out", (dir / "a").string()});
  const auto b = run_cli({"synth", "--spec", (dir / "small.spec").string(), "--out", (dir / "b").string()});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(slurp(dir / "a/manifest.csv") == slurp(dir / "b/manifest.csv"));
  CHECK(slurp(dir / "a/samples/case_3.csv") == slurp(dir / "b/samples/case_3.csv"));
  CHECK(slurp(dir / "a/meta.txt").find("command=synth") != std::string::npos);

  CHECK(run_cli({"synth", "--preset", "nope", "--out", (dir / "c").string()}).code == cli::kExitConfig);
  write_text(dir / "bad.spec", "dim=1\ncomponent.a=0|1|0.4\ncomponent.b=0|1|1\n");
  const auto bad = run_cli({"synth", "--spec", (dir / "bad.spec").string(), "--out", (dir / "c").string()});
  CHECK(bad.code == cli::kExitConfig);
  CHECK(bad.err.find("bad simplex") != std::string::npos);
}

TEST_CASE("fixture specs parse") {
  for (const char* name : {"benchmark.spec", "variance_contrast.spec", "null.spec"}) {
    TempDir dir("cli_fixture");
    const std::string spec = std::string(CKME_FIXTURE_DIR) + "/" + name;
    // A dry run on a shrunken copy keeps this fast.
    std::string text = slurp(spec);
    text.replace(text.find("sets_per_class=40"), 17, "sets_per_class=2");
    text.replace(text.find("cells_per_set=1000"), 18, "cells_per_set=10");
    write_text(dir / "s.spec", text);
    CHECK(run_cli({"synth", "--spec", (dir / "s.spec").string(), "--out", dir.path().string()}).code == 0);
  }
}

TEST_CASE("crossval, train, predict, interpret, stats") {
  TempDir dir("cli_flow");
  write_text(dir / "small.spec", kSmallSpec);
  REQUIRE(run_cli({"synth", "--spec", (dir / "small.spec").string(), "--out", (dir / "data").string()}).code == 0);
  const std::string manifest = (dir / "data/manifest.csv").string();

  const auto cv = run_cli(with_fast({"crossval", "--manifest", manifest, "--out", (dir / "cv").string()}));
  REQUIRE(cv.code == 0);
  CHECK(cv.out == "100.00 ± 0.00\n");
  const auto cv2 = run_cli(with_fast({"crossval", "--manifest", manifest, "--out", (dir / "cv2").string()}));
  CHECK(slurp(dir / "cv/cv_report.csv") == slurp(dir / "cv2/cv_report.csv"));

  const auto too_many = run_cli({"crossval", "--manifest", manifest, "--folds", "13", "--out", (dir / "x").string()});
  CHECK(too_many.code == cli::kExitConfig);
  CHECK(too_many.err.find("folds exceeds sample count") != std::string::npos);

  const std::string model = (dir / "model.txt").string();
  REQUIRE(run_cli(with_fast({"train", "--manifest", manifest, "--model", model, "--out", (dir / "tr").string()})).code == 0);
  REQUIRE(run_cli({"predict", "--model", model, "--manifest", manifest, "--out", (dir / "p1").string()}).code == 0);
  REQUIRE(run_cli({"predict", "--model", model, "--manifest", manifest, "--out", (dir / "p2").string()}).code == 0);
  const std::string predictions = slurp(dir / "p1/predictions.csv");
  CHECK(predictions == slurp(dir / "p2/predictions.csv"));
  std::istringstream rows(predictions);
  std::string line;
  std::getline(rows, line);
  int count = 0;
  while (std::getline(rows, line)) {
    const std::string truth = line.substr(0, line.find('_'));
    CHECK(line.substr(line.rfind(',') + 1) == truth);
    ++count;
  }
  CHECK(count == 12);

  write_text(dir / "wide.csv", "m1,m2,m3\n1,2,3\n");
  CHECK(run_cli({"predict", "--model", model, "--sample", (dir / "wide.csv").string(), "--out", (dir / "p3").string()})
            .code == cli::kExitData);

  const auto it = run_cli({"interpret", "--model", model, "--manifest", manifest, "--clusters", "4", "--out",
                           (dir / "it").string()});
  REQUIRE(it.code == 0);
  CHECK(it.out.find("pearson") != std::string::npos);
  std::istringstream clusters(slurp(dir / "it/clusters.csv"));
  int data_rows = 0;
  while (std::getline(clusters, line))
    if (!line.empty() && line[0] != '#' && line.rfind("cluster_id", 0) != 0) ++data_rows;
  CHECK(data_rows == 4);

  const auto st = run_cli({"stats", "--frequencies", (dir / "it/frequencies.csv").string(), "--cluster", "1", "--out",
                           (dir / "st").string()});
  CHECK(st.code == 0);
  CHECK(st.out.find("rank-sum p = ") != std::string::npos);
  CHECK(run_cli({"stats", "--frequencies", (dir / "it/frequencies.csv").string(), "--cluster", "9", "--out",
                 (dir / "st").string()})
            .code == cli::kExitConfig);
}

TEST_CASE("interpret reports undefined correlation for a flat model") {
  TempDir dir("cli_flat");
  write_text(dir / "small.spec", kSmallSpec);
  REQUIRE(run_cli({"synth", "--spec", (dir / "small.spec").string(), "--out", (dir / "data").string()}).code == 0);
  TrainMeta meta;
  meta.marker_names = {"m1", "m2"};
  meta.label_names = {"case", "ctrl"};
  meta.m = 30;
  const LinearModel flat{RffMap::sample(2, 50, 1.0, 1), Vector::Zero(50), 0.25, 1.0, meta};
  save_model(flat, dir / "flat.txt");
  const auto it = run_cli({"interpret", "--model", (dir / "flat.txt").string(), "--manifest",
                           (dir / "data/manifest.csv").string(), "--clusters", "3", "--out", (dir / "it").string()});
  REQUIRE(it.code == 0);
  CHECK(it.out.find("n/a: zero variance") != std::string::npos);
  std::istringstream scores(slurp(dir / "it/scores.csv"));
  std::string line;
  std::getline(scores, line);
  while (std::getline(scores, line)) {
    const auto a = line.find(',', line.find(',') + 1);
    CHECK(line.substr(a + 1, line.find(',', a + 1) - a - 1) == "0.25");
  }
}

TEST_CASE("flags override the config file") {
  TempDir dir("cli_config");
  write_text(dir / "small.spec", kSmallSpec);
  write_text(dir / "run.cfg", "D=100\nm=20\nseed=9\n");
  const auto r = run_cli({"synth", "--spec", (dir / "small.spec").string(), "--config", (dir / "run.cfg").string(),
                          "--D", "60", "--out", dir.path().string()});
  REQUIRE(r.code == 0);
  const std::string meta = slurp(dir / "meta.txt");
  CHECK(meta.find("\nD=60\n") != std::string::npos);
  CHECK(meta.find("\nm=20\n") != std::string::npos);
  CHECK(meta.find("\nseed=9\n") != std::string::npos);

  CHECK(run_cli({"synth", "--config", (dir / "missing.cfg").string(), "--preset", "null", "--out",
                 dir.path().string()})
            .code == cli::kExitConfig);
  CHECK(run_cli({"crossval", "--manifest", "x.csv", "--D", "7", "--out", dir.path().string()}).code ==
        cli::kExitConfig);
  CHECK(run_cli({"crossval", "--manifest", (dir / "none.csv").string(), "--out", dir.path().string()}).code ==
        cli::kExitData);
  CHECK(run_cli({"frobnicate"}).code == cli::kExitConfig);
  CHECK(run_cli({}).code == cli::kExitConfig);
}

TEST_CASE("herd and featurize outputs") {
  TempDir dir("cli_herd");
  write_text(dir / "small.spec", kSmallSpec);
  REQUIRE(run_cli({"synth", "--spec", (dir / "small.spec").string(), "--out", (dir / "data").string()}).code == 0);
  const std::string manifest = (dir / "data/manifest.csv").string();
  REQUIRE(run_cli({"herd", "--manifest", manifest, "--D", "100", "--m", "15", "--out", (dir / "h").string()}).code == 0);
  const auto herded = load_sample_set(dir / "h/herded/case_0.csv");
  CHECK(herded.n() == 15);
  REQUIRE(run_cli({"featurize", "--manifest", manifest, "--D", "20", "--out", (dir / "f").string()}).code == 0);
  const std::string emb = slurp(dir / "f/embeddings.csv");
  CHECK(emb.rfind("sample_id,e0,", 0) == 0);
  CHECK(emb.find(",e19\n") != std::string::npos);

  REQUIRE(run_cli({"herd-bench", "--spec", (dir / "small.spec").string(), "--ms", "10,200", "--bench-seeds", "2",
                   "--D", "100", "--out", (dir / "b").string()})
              .code == 0);
  const std::string bench = slurp(dir / "b/herd_bench.csv");
  CHECK(bench.find("herding,200,0\n") != std::string::npos);
  CHECK(bench.find("uniform,200,0\n") != std::string::npos);
}
