#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "simplex_eval/credible_intervals.hpp"
#include "simplex_eval/data_io.hpp"
#include "simplex_eval/errors.hpp"
#include "simplex_eval/run_config.hpp"

using namespace simplex_eval;
using nlohmann::ordered_json;

namespace {

std::string tmp_path(const std::string& name) {
  std::filesystem::create_directories("tmp_io");
  return "tmp_io/" + name;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  os << text;
}

std::string read_text(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

void write_tensor_raw(const std::string& path, std::uint64_t n, std::uint64_t b,
                      std::uint64_t k, const std::vector<double>& payload,
                      const char* magic = "SEVT0001", int extra_bytes = 0) {
  std::ofstream os(path, std::ios::binary);
  os.write(magic, 8);
  for (std::uint64_t v : {n, b, k}) os.write(reinterpret_cast<const char*>(&v), 8);
  os.write(reinterpret_cast<const char*>(payload.data()),
           static_cast<std::streamsize>(payload.size() * 8));
  for (int i = 0; i < extra_bytes; ++i) os.put('\0');
}

PairedDataset sample_pairs() {
  PairedDataset ds;
  ds.k = 3;
  ds.rows.push_back({"a", "train", ProbVec({1.0 / 3, 1.0 / 3, 1.0 / 3}),
                     ProbVec({0.2, 0.3, 0.5})});
  ds.rows.push_back({"b", "train", ProbVec({0.1, 0.2, 0.7}), ProbVec({0.15, 0.25, 0.6})});
  ds.rows.push_back({"c", "test", ProbVec({0.05, 0.05, 0.9}), ProbVec({0.1, 0.1, 0.8})});
  return ds;
}

}  // namespace

TEST_CASE("annotation ingestion drops invalid responses and aggregates votes") {
  const std::string path = tmp_path("ann.csv");
  write_text(path,
             "sample_id,annotator_id,class_index\n"
             "s1,u1,0\n"
             "s1,u2,0\n"
             "s1,u3,1\n"
             "s2,u1,\n"
             "s2,u2,abc\n"
             "s2,u3,2\n"
             "s3,u1,1\n");
  const AnnotationSet ann = load_annotations(path, 3);
  CHECK(ann.k == 3);
  CHECK(ann.records.size() == 5);  // two dropped

  const auto agg = aggregate_human_frequency(ann);
  REQUIRE(agg.size() == 3);
  CHECK(agg[0].first == "s1");
  CHECK(agg[0].second[0] == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(agg[0].second[1] == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(agg[0].second[2] == 0.0);
  CHECK(agg[1].first == "s2");
  CHECK(agg[1].second[2] == 1.0);
  CHECK(agg[2].first == "s3");
  CHECK(agg[2].second[1] == 1.0);
}

TEST_CASE("annotation errors carry the offending line") {
  const std::string path = tmp_path("ann_bad.csv");

  SUBCASE("class index out of range") {
    write_text(path,
               "sample_id,annotator_id,class_index\n"
               "s1,u1,0\n"
               "s1,u2,7\n");
    try {
      load_annotations(path, 3);
      FAIL("expected InputError");
    } catch (const InputError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("line 3") != std::string::npos);
      CHECK(msg.find("7") != std::string::npos);
    }
  }

  SUBCASE("duplicate sample and annotator pair") {
    write_text(path,
               "sample_id,annotator_id,class_index\n"
               "s1,u1,0\n"
               "s1,u1,1\n");
    CHECK_THROWS_AS(load_annotations(path, 3), InputError);
  }

  SUBCASE("wrong header") {
    write_text(path, "sample,annotator,class\ns1,u1,0\n");
    CHECK_THROWS_AS(load_annotations(path, 3), InputError);
  }

  SUBCASE("no surviving rows") {
    write_text(path, "sample_id,annotator_id,class_index\ns1,u1,\n");
    CHECK_THROWS_AS(load_annotations(path, 3), InputError);
  }

  SUBCASE("k below 2") {
    write_text(path, "sample_id,annotator_id,class_index\ns1,u1,0\n");
    CHECK_THROWS_AS(load_annotations(path, 1), InputError);
  }

  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_annotations(tmp_path("absent.csv"), 3), InputError);
  }
}

TEST_CASE("pairs files round trip exactly") {
  const std::string path = tmp_path("pairs.csv");
  const PairedDataset ds = sample_pairs();
  save_pairs(path, ds);
  const PairedDataset back = load_pairs(path);
  REQUIRE(back.rows.size() == ds.rows.size());
  CHECK(back.k == 3);
  for (std::size_t i = 0; i < ds.rows.size(); ++i) {
    CHECK(back.rows[i].sample_id == ds.rows[i].sample_id);
    CHECK(back.rows[i].split == ds.rows[i].split);
    for (int c = 0; c < 3; ++c) {
      CHECK(back.rows[i].y[c] == ds.rows[i].y[c]);
      CHECK(back.rows[i].yhat[c] == ds.rows[i].yhat[c]);
    }
  }
}

TEST_CASE("malformed pairs files name the bad line") {
  const std::string path = tmp_path("pairs_bad.csv");
  const std::string header = "sample_id,split,y_0,y_1,y_2,yhat_0,yhat_1,yhat_2\n";

  SUBCASE("wrong field count") {
    write_text(path, header + "a,train,0.2,0.3,0.5,0.2,0.3\n");
    try {
      load_pairs(path);
      FAIL("expected InputError");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }

  SUBCASE("bad split tag") {
    write_text(path, header + "a,validate,0.2,0.3,0.5,0.2,0.3,0.5\n");
    CHECK_THROWS_AS(load_pairs(path), InputError);
  }

  SUBCASE("duplicate sample id") {
    write_text(path, header + "a,train,0.2,0.3,0.5,0.2,0.3,0.5\n" +
                         "a,test,0.2,0.3,0.5,0.2,0.3,0.5\n");
    CHECK_THROWS_AS(load_pairs(path), InputError);
  }

  SUBCASE("non-numeric probability") {
    write_text(path, header + "a,train,0.2,x,0.5,0.2,0.3,0.5\n");
    CHECK_THROWS_AS(load_pairs(path), InputError);
  }

  SUBCASE("row off the simplex") {
    write_text(path, header + "a,train,0.9,0.9,0.9,0.2,0.3,0.5\n");
    CHECK_THROWS_AS(load_pairs(path), InputError);
  }

  SUBCASE("unexpected header") {
    write_text(path, "id,split,p0,p1,p2,q0,q1,q2\na,train,0.2,0.3,0.5,0.2,0.3,0.5\n");
    CHECK_THROWS_AS(load_pairs(path), InputError);
  }
}

TEST_CASE("the label table reads both csv layouts") {
  SUBCASE("labels.csv") {
    const std::string path = tmp_path("labels.csv");
    save_labels(path, {{"s1", ProbVec({0.5, 0.25, 0.25})},
                       {"s2", ProbVec({1.0 / 3, 1.0 / 3, 1.0 / 3})}});
    const LabelTable t = load_label_table(path);
    CHECK(t.k == 3);
    REQUIRE(t.ids.size() == 2);
    CHECK(t.ids[0] == "s1");
    CHECK(t.splits.empty());
    CHECK(t.yhat.empty());
    CHECK(t.y[1][0] == doctest::Approx(1.0 / 3).epsilon(1e-15));
  }

  SUBCASE("pairs.csv") {
    const std::string path = tmp_path("pairs_table.csv");
    save_pairs(path, sample_pairs());
    const LabelTable t = load_label_table(path);
    CHECK(t.k == 3);
    REQUIRE(t.ids.size() == 3);
    REQUIRE(t.splits.size() == 3);
    REQUIRE(t.yhat.size() == 3);
    CHECK(t.splits[2] == "test");
    CHECK(t.yhat[0][2] == 0.5);
  }

  SUBCASE("garbage header") {
    const std::string path = tmp_path("table_bad.csv");
    write_text(path, "who,knows\n1,2\n");
    CHECK_THROWS_AS(load_label_table(path), InputError);
  }
}

TEST_CASE("tensor files round trip bitwise") {
  EvaluatorSamples s;
  s.n = 2;
  s.b = 3;
  s.k = 3;
  s.data = {0.2, 0.3, 0.5,  0.1, 0.2, 0.7,  1.0 / 3, 1.0 / 3, 1.0 / 3,
            0.25, 0.25, 0.5, 0.6, 0.2, 0.2, 0.05, 0.9, 0.05};
  const std::string path = tmp_path("draws.sevt");
  save_tensor(path, s);
  const EvaluatorSamples back = load_tensor(path);
  CHECK(back.n == 2);
  CHECK(back.b == 3);
  CHECK(back.k == 3);
  CHECK(back.data == s.data);
}

TEST_CASE("corrupt tensor files are rejected") {
  const std::string path = tmp_path("bad.sevt");
  const std::vector<double> ok(6, 0.5);

  SUBCASE("bad magic") {
    write_tensor_raw(path, 1, 2, 3, ok, "NOPE0001");
    CHECK_THROWS_AS(load_tensor(path), InputError);
  }
  SUBCASE("truncated payload") {
    write_tensor_raw(path, 1, 2, 3, {0.5, 0.5, 0.5});
    CHECK_THROWS_AS(load_tensor(path), InputError);
  }
  SUBCASE("trailing bytes") {
    write_tensor_raw(path, 1, 2, 3, ok, "SEVT0001", 4);
    CHECK_THROWS_AS(load_tensor(path), InputError);
  }
  SUBCASE("non-finite payload") {
    std::vector<double> bad = ok;
    bad[4] = std::numeric_limits<double>::quiet_NaN();
    write_tensor_raw(path, 1, 2, 3, bad);
    CHECK_THROWS_AS(load_tensor(path), InputError);
  }
  SUBCASE("absurd shape") {
    write_tensor_raw(path, std::uint64_t(1) << 61, 2, 3, ok);
    CHECK_THROWS_AS(load_tensor(path), InputError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_tensor(tmp_path("absent.sevt")), InputError);
  }
}

TEST_CASE("half split shuffles deterministically") {
  PairedDataset ds;
  ds.k = 3;
  for (int i = 0; i < 7; ++i)
    ds.rows.push_back({"r" + std::to_string(i), "train",
                       ProbVec({0.2, 0.3, 0.5}), ProbVec({0.2, 0.3, 0.5})});

  const auto [fit, eval] = split_half_shuffled(ds, 12345);
  CHECK(fit.rows.size() == 4);  // ceil(7/2)
  CHECK(eval.rows.size() == 3);
  CHECK(fit.k == 3);

  std::set<std::string> seen;
  for (const auto& r : fit.rows) seen.insert(r.sample_id);
  for (const auto& r : eval.rows) seen.insert(r.sample_id);
  CHECK(seen.size() == 7);

  const auto [fit2, eval2] = split_half_shuffled(ds, 12345);
  for (std::size_t i = 0; i < fit.rows.size(); ++i)
    CHECK(fit2.rows[i].sample_id == fit.rows[i].sample_id);

  bool differs = false;
  for (std::uint64_t seed = 1; seed <= 20 && !differs; ++seed) {
    const auto [f3, e3] = split_half_shuffled(ds, seed);
    for (std::size_t i = 0; i < fit.rows.size(); ++i)
      if (f3.rows[i].sample_id != fit.rows[i].sample_id) differs = true;
  }
  CHECK(differs);

  PairedDataset one;
  one.k = 3;
  one.rows.push_back(ds.rows[0]);
  CHECK_THROWS_AS(split_half_shuffled(one, 1), InputError);
}

TEST_CASE("histogram bins cover the finite range") {
  const Histogram h = histogram({0.0, 1.0, 2.0, 3.0}, 2);
  REQUIRE(h.edges.size() == 3);
  CHECK(h.edges[0] == 0.0);
  CHECK(h.edges[1] == 1.5);
  CHECK(h.edges[2] == 3.0);
  REQUIRE(h.counts.size() == 2);
  CHECK(h.counts[0] == 2);
  CHECK(h.counts[1] == 2);

  const double inf = std::numeric_limits<double>::infinity();
  const Histogram hi = histogram({0.0, 1.0, 2.0, 3.0, inf, inf}, 2);
  CHECK(hi.counts[0] + hi.counts[1] == 4);  // infinities excluded

  const Histogram hc = histogram({2.5, 2.5, 2.5}, 5);
  REQUIRE(hc.edges.size() == 2);
  CHECK(hc.edges[0] == 2.5);
  CHECK(hc.edges[1] == 2.5);
  REQUIRE(hc.counts.size() == 1);
  CHECK(hc.counts[0] == 3);

  const Histogram he = histogram({inf}, 3);
  CHECK(he.edges.empty());
  CHECK(he.counts.empty());

  CHECK_THROWS_AS(histogram({1.0, 2.0}, 0), InputError);
}

TEST_CASE("measure summaries agree with their parts") {
  std::vector<double> values;
  for (int i = 1; i <= 100; ++i) values.push_back(static_cast<double>(i));
  const MeasureRecord rec = summarize_measure("l2", values, 0.95, 10);
  CHECK(rec.measure_name == "l2");
  CHECK(rec.count == 100);
  CHECK(rec.mean == doctest::Approx(50.5).epsilon(1e-12));
  CHECK(rec.median == doctest::Approx(50.5).epsilon(1e-12));
  CHECK(rec.rtci.upper == doctest::Approx(95.05).epsilon(1e-12));
  const CredibleInterval h = hpdi(values, 0.95);
  CHECK(rec.hpdi.lower == h.lower);
  CHECK(rec.hpdi.upper == h.upper);
  CHECK(rec.hist.counts.size() == 10);

  CHECK_THROWS_AS(summarize_measure("l2", {}, 0.95), InputError);
}

TEST_CASE("json serialization spells out non-finite values") {
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(json_double(1.5) == ordered_json(1.5));
  CHECK(json_double(inf) == ordered_json("inf"));
  CHECK(json_double(-inf) == ordered_json("-inf"));
  CHECK(json_double(std::nan("")) == ordered_json("nan"));

  std::vector<double> values{1.0, 2.0, 3.0, inf};
  const ordered_json j = measure_record_json(summarize_measure("kl", values, 0.9, 2));
  const std::vector<std::string> keys{"measure_name", "count", "mean",     "median",
                                      "hpdi",         "rtci",  "histogram"};
  REQUIRE(j.size() == keys.size());
  std::size_t i = 0;
  for (auto it = j.begin(); it != j.end(); ++it, ++i) CHECK(it.key() == keys[i]);
  CHECK(j["count"] == 4);
  CHECK(j["hpdi"].size() == 3);
  CHECK(j["rtci"].size() == 2);
  CHECK(j["rtci"]["upper"] == ordered_json("inf"));  // 25% infinite
  CHECK(j["histogram"]["counts"].size() == 2);
}

TEST_CASE("reports end with a newline and parse back") {
  const std::string path = tmp_path("report.json");
  ordered_json rep{{"command", "measure"}, {"seed", 7}};
  save_report(path, rep);
  const std::string text = read_text(path);
  REQUIRE(!text.empty());
  CHECK(text.back() == '\n');
  CHECK(ordered_json::parse(text) == rep);
}

TEST_CASE("run configuration defaults, overrides, and rejections") {
  SUBCASE("empty object gives the documented defaults") {
    const RunConfig cfg = RunConfig::from_json(ordered_json::object());
    CHECK(cfg.evaluator == "bnn");
    CHECK(cfg.seed == 0);
    CHECK(cfg.draws == 14000);
    CHECK(cfg.mass == 0.95);
    REQUIRE(cfg.measures.size() == 1);
    CHECK(cfg.measures[0] == "l2");
    CHECK(cfg.per_split);
    CHECK(cfg.evaluators.size() == 5);
    CHECK(cfg.hmc.target_draws == 14000);
    CHECK(cfg.bnn.sigma2 == 0.1);
    CHECK(cfg.ndod_max_attempts == 10000);
  }

  SUBCASE("target_draws follows the draw count unless pinned") {
    RunConfig cfg = RunConfig::from_json({{"draws", 500}});
    CHECK(cfg.hmc.target_draws == 500);
    cfg = RunConfig::from_json({{"draws", 500}, {"hmc", {{"target_draws", 800}}}});
    CHECK(cfg.hmc.target_draws == 800);
    CHECK_THROWS_AS(
        RunConfig::from_json({{"draws", 500}, {"hmc", {{"target_draws", 200}}}}),
        InputError);
  }

  SUBCASE("unknown keys are named with their path") {
    try {
      RunConfig::from_json({{"sede", 1}});
      FAIL("expected InputError");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("'sede'") != std::string::npos);
    }
    try {
      RunConfig::from_json({{"hmc", {{"foo", 1}}}});
      FAIL("expected InputError");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("'hmc.foo'") != std::string::npos);
    }
  }

  SUBCASE("bad values are rejected") {
    CHECK_THROWS_AS(RunConfig::from_json({{"mass", 0.0}}), InputError);
    CHECK_THROWS_AS(RunConfig::from_json({{"mass", 1.5}}), InputError);
    CHECK_THROWS_AS(RunConfig::from_json({{"draws", 0}}), InputError);
    CHECK_THROWS_AS(RunConfig::from_json({{"evaluator", "bogus"}}), InputError);
    CHECK_THROWS_AS(RunConfig::from_json({{"measures", ordered_json::array()}}),
                    InputError);
    CHECK_THROWS_AS(RunConfig::from_json({{"measures", {"l2", "nope"}}}), InputError);
    CHECK_THROWS_AS(
        RunConfig::from_json({{"evaluators", {"uniform", "uniform"}}}), InputError);
    CHECK_THROWS_AS(RunConfig::from_json({{"bnn", {{"sigma2", 0.0}}}}), InputError);
  }

  SUBCASE("to_json round trips") {
    const RunConfig cfg = RunConfig::from_json(
        {{"evaluator", "ndod"}, {"seed", 42}, {"draws", 100}, {"measures", {"l2", "kl"}}});
    const RunConfig back = RunConfig::from_json(cfg.to_json());
    CHECK(back.evaluator == "ndod");
    CHECK(back.seed == 42);
    CHECK(back.draws == 100);
    CHECK(back.to_json() == cfg.to_json());
  }

  SUBCASE("config files load and reject broken json") {
    const std::string path = tmp_path("cfg.json");
    write_text(path, "{\"evaluator\": \"uniform\", \"draws\": 9}\n");
    const RunConfig cfg = RunConfig::load(path);
    CHECK(cfg.evaluator == "uniform");
    CHECK(cfg.draws == 9);
    write_text(path, "{not json");
    CHECK_THROWS_AS(RunConfig::load(path), InputError);
    CHECK_THROWS_AS(RunConfig::load(tmp_path("absent.json")), InputError);
  }
}
