#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "graphcal/errors.hpp"
#include "graphcal/pipeline/artifacts.hpp"
#include "graphcal/pipeline/config.hpp"
#include "graphcal/pipeline/run.hpp"
#include "graphcal/pipeline/stages.hpp"

namespace graphcal::pipeline {
namespace {

namespace fs = std::filesystem;

const char* kSmallIni = R"([run]
seed = 3

[synth]
questions = 60
n = 12
distortion = square

[train]
hidden = 8,8,8
max_epochs = 5
learning_rate = 1e-3
)";

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "graphcal_pipeline_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PipelineConfig small_config(const fs::path& out_dir) {
  auto tree = parse_ini(kSmallIni);
  apply_assignment(tree, "run.out_dir=" + out_dir.string());
  return config_from_tree(tree);
}

TEST(Config, DefaultsAndSeedFallback) {
  const auto c = config_from_tree(parse_ini("[run]\nseed = 42\n[graph]\nseed = 5\n"));
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.synth.seed, 42u);
  EXPECT_EQ(c.split.seed, 42u);
  EXPECT_EQ(c.train.model_seed, 42u);
  EXPECT_EQ(c.train.split_seed, 42u);
  EXPECT_EQ(c.graph.seed, 5u);
  EXPECT_EQ(c.train.learning_rate, 1e-4);
  EXPECT_EQ(c.train.dims.hidden, (std::array<std::size_t, 3>{256, 512, 1024}));
  EXPECT_EQ(c.evaluate.bins, 10u);
  EXPECT_EQ(c.repeat.rows.size(), 10u);
}

TEST(Config, UnknownKeysAndBadValuesAreConfigErrors) {
  EXPECT_THROW(config_from_tree(parse_ini("[train]\nlearning_rat = 1\n")), ConfigError);
  EXPECT_THROW(config_from_tree(parse_ini("[nonsense]\nx = 1\n")), ConfigError);
  EXPECT_THROW(config_from_tree(parse_ini("[train]\nmax_epochs = many\n")), ConfigError);
  EXPECT_THROW(config_from_tree(parse_ini("[train]\nhidden = 1,2\n")), ConfigError);
  EXPECT_THROW(config_from_tree(parse_ini("[evaluate]\nmethod = magic\n")), ConfigError);
  Tree t;
  EXPECT_THROW(apply_assignment(t, "no_equals_sign"), ConfigError);
  EXPECT_THROW(apply_assignment(t, "nosection=1"), ConfigError);
}

TEST(Config, OverridesWinAndHashFollowsContent) {
  auto tree = parse_ini(kSmallIni);
  const auto base = config_from_tree(tree);
  apply_assignment(tree, "train.max_epochs=7");
  const auto changed = config_from_tree(tree);
  EXPECT_EQ(changed.train.max_epochs, 7u);
  EXPECT_NE(config_hash(base), config_hash(changed));
  // Same values in a different textual order hash the same.
  const auto reordered = config_from_tree(parse_ini("[train]\nmax_epochs = 7\nlearning_rate = 0.001\nhidden = 8,8,8\n"
                                                    "[synth]\ndistortion = square\nn = 12\nquestions = 60\n"
                                                    "[run]\nseed = 3\n"));
  EXPECT_EQ(canonical_ini(reordered), canonical_ini(changed));
  EXPECT_EQ(config_hash(reordered), config_hash(changed));
  // The canonical text parses back to the same configuration.
  EXPECT_EQ(canonical_ini(config_from_tree(parse_ini(canonical_ini(changed)))), canonical_ini(changed));
}

TEST(Config, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(MethodSpec, ParseAndNames) {
  const auto spec = parse_method_spec("cluster-freq+isotonic");
  EXPECT_EQ(spec.method, ScoreMethod::cluster_freq);
  EXPECT_EQ(spec.posthoc, PosthocMethod::isotonic);
  EXPECT_EQ(to_string(spec), "cluster-freq+isotonic");
  EXPECT_EQ(display_name(spec), "ClusterFreq+Iso");
  EXPECT_EQ(display_name(parse_method_spec("gnn")), "GNN");
  EXPECT_THROW(parse_method_spec("gnn+magic"), ConfigError);
}

TEST(Format, MeanStd) {
  EXPECT_EQ(format_mean_std(std::vector<double>{0.135, 0.137}), ".136 ± .001");
  EXPECT_EQ(format_mean_std(std::vector<double>{0.5}), ".500 ± .000");
}

TEST(Split, DisjointCoveringAndSeeded) {
  std::vector<std::string> ids;
  for (int i = 0; i < 100; ++i) ids.push_back("q" + std::to_string(i));
  const auto s = make_split(ids, 0.1, 0.1, 7);
  EXPECT_EQ(s.test.size(), 10u);
  EXPECT_EQ(s.val.size(), 10u);
  EXPECT_EQ(s.train.size(), 80u);
  std::set<std::string> all(s.train.begin(), s.train.end());
  all.insert(s.val.begin(), s.val.end());
  all.insert(s.test.begin(), s.test.end());
  EXPECT_EQ(all.size(), 100u);
  EXPECT_EQ(make_split(ids, 0.1, 0.1, 7).test, s.test);
  EXPECT_NE(make_split(ids, 0.1, 0.1, 8).test, s.test);
  EXPECT_THROW(make_split({"a", "b"}, 0.1, 0.1, 0), DataError);
  EXPECT_THROW(make_split(ids, 0.5, 0.5, 0), ConfigError);

  const auto path = fresh_dir("split") / "split.json";
  write_split(s, path);
  const auto back = read_split(path);
  EXPECT_EQ(back.train, s.train);
  EXPECT_EQ(back.test, s.test);
  EXPECT_EQ(back.seed, 7u);
}

TEST(Scores, RoundTripAndErrors) {
  ScoresFile f;
  f.method = "degree";
  f.questions.push_back({QuestionScores{"a", {0.25, 0.5}, 1}, 0.75});
  f.questions.push_back({QuestionScores{"b", {1.0}, 0}, std::nullopt});
  const auto dir = fresh_dir("scores");
  write_scores(f, dir / "s.jsonl");
  const auto back = read_scores(dir / "s.jsonl");
  EXPECT_EQ(back.method, "degree");
  ASSERT_EQ(back.questions.size(), 2u);
  EXPECT_EQ(back.questions[0].scores.probabilities, f.questions[0].scores.probabilities);
  EXPECT_EQ(back.questions[0].uncertainty, 0.75);
  EXPECT_FALSE(back.questions[1].uncertainty);
  std::ofstream(dir / "bad.jsonl") << R"({"id":"a","method":"x","primary_index":3,"probabilities":[0.1]})" << "\n";
  EXPECT_THROW(read_scores(dir / "bad.jsonl"), ParseError);
}

TEST(Manifest, FailureMarksDeclaredFilesPartial) {
  const auto dir = fresh_dir("manifest");
  Manifest m(dir, "graphcal test");
  m.begin_stage("synth");
  std::ofstream(dir / "a.txt") << "done";
  m.declare(dir / "a.txt");
  m.begin_stage("graph");
  std::ofstream(dir / "b.txt") << "half";
  m.declare(dir / "b.txt");
  m.declare(dir / "never.txt");
  m.fail("boom");
  m.write(dir / "manifest.json");
  const auto j = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(j.at("status"), "failed");
  EXPECT_EQ(j.at("failed_stage"), "graph");
  ASSERT_EQ(j.at("artifacts").size(), 2u);
  EXPECT_EQ(j.at("artifacts")[0].at("path"), "a.txt");
  EXPECT_EQ(j.at("artifacts")[0].at("status"), "complete");
  EXPECT_EQ(j.at("artifacts")[0].at("sha256"), sha256_hex("done"));
  EXPECT_EQ(j.at("artifacts")[1].at("status"), "partial");
}

TEST(Pipeline, DeterministicAcrossRuns) {
  const auto a = fresh_dir("det_a");
  const auto b = fresh_dir("det_b");
  run_pipeline(small_config(a), "test");
  run_pipeline(small_config(b), "test");
  for (const char* f : {"report.json", "reliability.csv", "scores.jsonl", "model.json", "split.json", "dataset.jsonl",
                        "train_log.csv"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
  EXPECT_EQ(manifest.at("status"), "complete");
  EXPECT_EQ(manifest.at("config_sha256"), config_hash(small_config(a)));
  for (const auto& art : manifest.at("artifacts")) {
    EXPECT_EQ(art.at("sha256"), sha256_file(a / art.at("path").get<std::string>()));
  }
}

TEST(Pipeline, BaselineMethodAndPosthoc) {
  const auto dir = fresh_dir("baseline");
  auto c = small_config(dir);
  c.evaluate.method = ScoreMethod::cluster_freq;
  c.evaluate.posthoc = PosthocMethod::isotonic;
  const auto r = run_pipeline(c, "test");
  EXPECT_EQ(r.evaluation.subset, "test");
  EXPECT_EQ(r.evaluation.questions, r.split.test.size());
  EXPECT_FALSE(fs::exists(dir / "model.json"));
}

TEST(Pipeline, FailingStageIsRecorded) {
  const auto dir = fresh_dir("failing");
  auto c = small_config(dir);
  c.dataset = dir / "missing.jsonl";
  try {
    run_pipeline(c, "test");
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::data);
    EXPECT_EQ(e.stage(), "ingest");
  }
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest.at("status"), "failed");
  EXPECT_EQ(manifest.at("failed_stage"), "ingest");
}

TEST(Pipeline, SeqLikelihoodWithoutLogprobsIsNotComputed) {
  const auto dir = fresh_dir("repeat");
  auto c = small_config(dir);
  c.repeat.runs = 2;
  c.repeat.rows = {parse_method_spec("cluster-freq"), parse_method_spec("seqlik"), parse_method_spec("gnn")};
  const auto summary = run_repeat_command(c, "test");
  ASSERT_EQ(summary.rows.size(), 3u);
  EXPECT_TRUE(summary.rows[0].computed);
  EXPECT_EQ(summary.rows[0].ece.size(), 2u);
  EXPECT_FALSE(summary.rows[1].computed);
  EXPECT_TRUE(summary.rows[2].computed);
  const auto table = slurp(dir / "table.md");
  EXPECT_TRUE(table.starts_with("| Method | Brier | AUROC | ECE |\n|---|---|---|---|\n"));
  EXPECT_NE(table.find("SeqLikelihood | not computed"), std::string::npos);
  EXPECT_NE(table.find("APRICOT"), std::string::npos);
  EXPECT_EQ(table, format_table(summary));
}

#ifdef GRAPHCAL_CLI

int cli(const std::string& args) {
  const int status = std::system((std::string(GRAPHCAL_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, SubcommandSequenceMatchesRun) {
  const auto dir = fresh_dir("cli");
  std::ofstream(dir / "cfg.ini") << kSmallIni;
  const std::string cfg = "--config " + (dir / "cfg.ini").string();
  const std::string d = dir.string();
  ASSERT_EQ(cli("run " + cfg + " --out-dir " + d + "/run"), 0);
  ASSERT_EQ(cli("synth " + cfg + " --out " + d + "/raw.jsonl"), 0);
  ASSERT_EQ(cli("ingest " + cfg + " --in " + d + "/raw.jsonl --out " + d + "/ing.jsonl"), 0);
  ASSERT_EQ(cli("label " + cfg + " --in " + d + "/ing.jsonl --out " + d + "/lab.jsonl"), 0);
  ASSERT_EQ(cli("train " + cfg + " --in " + d + "/lab.jsonl --model " + d + "/model.json --split-out " + d +
                "/split.json"),
            0);
  ASSERT_EQ(cli("calibrate " + cfg + " --model " + d + "/model.json --in " + d + "/lab.jsonl --out " + d +
                "/scores.jsonl"),
            0);
  ASSERT_EQ(cli("evaluate " + cfg + " --in " + d + "/lab.jsonl --scores " + d + "/scores.jsonl --split " + d +
                "/split.json --report " + d + "/report.json"),
            0);
  EXPECT_EQ(slurp(dir / "lab.jsonl"), slurp(dir / "run/dataset.jsonl"));
  EXPECT_EQ(slurp(dir / "model.json"), slurp(dir / "run/model.json"));
  EXPECT_EQ(slurp(dir / "report.json"), slurp(dir / "run/report.json"));

  // Re-running from the recorded manifest reproduces the report.
  ASSERT_EQ(cli("run --from-manifest " + d + "/run/manifest.json --out-dir " + d + "/again"), 0);
  EXPECT_EQ(slurp(dir / "again/report.json"), slurp(dir / "run/report.json"));
}

TEST(Cli, ExitCodes) {
  const auto dir = fresh_dir("cli_exit");
  const std::string d = dir.string();
  EXPECT_EQ(cli("run --set train.nonsense=1 --out-dir " + d), 2);
  EXPECT_EQ(cli("run --no-such-flag"), 2);
  EXPECT_EQ(cli("ingest --in " + d + "/missing.jsonl --out " + d + "/x.jsonl"), 3);
  std::ofstream(dir / "one.jsonl") << R"({"id":"a","question":"q","responses":[{"text":"x","label":1},{"text":"y","label":1}]})"
                                   << "\n";
  std::ofstream(dir / "s.jsonl") << R"({"id":"a","method":"degree","primary_index":0,"probabilities":[0.5,0.5]})"
                                 << "\n";
  // A single-class evaluation set has no AUROC.
  EXPECT_EQ(cli("evaluate --in " + d + "/one.jsonl --scores " + d + "/s.jsonl --report " + d + "/r.json"), 4);
}

#endif

}  // namespace
}  // namespace graphcal::pipeline
