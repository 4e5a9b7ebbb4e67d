#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "luxen/bench.hpp"
#include "luxen/csv.hpp"
#include "luxen/server.hpp"
#include "luxen/spec_doc.hpp"

namespace fs = std::filesystem;
using namespace luxen;

namespace {

struct OptimizerFlags {
  std::optional<std::size_t> sample_cap;
  std::optional<std::size_t> k;
  std::optional<double> margin;
  std::optional<std::size_t> parallelism;

  void add(CLI::App& app) {
    app.add_option("--sample-cap", sample_cap, "Rows in the pruning sample (LUXEN_SAMPLE_CAP)")->check(CLI::PositiveNumber);
    app.add_option("--k", k, "Visualizations per action (LUXEN_TOPK)")->check(CLI::PositiveNumber);
    app.add_option("--margin", margin, "Pruning cost margin (LUXEN_PRUNE_MARGIN)")->check(CLI::NonNegativeNumber);
    app.add_option("--parallelism", parallelism, "Worker threads, 0 for all cores (LUXEN_PARALLELISM)");
  }

  OptimizerConfig apply(OptimizerConfig c) const {
    if (sample_cap) c.sample_cap = *sample_cap;
    if (k) c.k = *k;
    if (margin) c.margin = *margin;
    if (parallelism) c.parallelism = *parallelism;
    return c;
  }
};

int run_recommend(const std::string& input, const std::string& intent_text, const std::string& out_dir,
                  const std::string& level_name, const OptimizerConfig& base) {
  auto level = parse_opt_level(level_name);
  if (!level) {
    std::cerr << "error: unknown opt level '" << level_name << "'\n";
    return 2;
  }
  std::ifstream in(input, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read '" << input << "'\n";
    return 1;
  }
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) {
    std::cerr << "error: failed reading '" << input << "'\n";
    return 1;
  }

  std::shared_ptr<Frame> frame;
  try {
    frame = Frame::create(parse_csv(text));
  } catch (const Error& e) {
    std::cerr << "error: " << input << ": " << e.what() << "\n";
    return 2;
  }

  if (!intent_text.empty()) {
    try {
      auto intent = parse_intent_list(intent_text);
      for (const auto& w : validate_intent(intent, *frame->metadata())) std::cerr << "warning: " << w.message << "\n";
      frame->set_intent(intent);
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }

  auto engine = make_engine(*level, base);
  std::shared_ptr<const Dashboard> dash;
  try {
    dash = engine->lookup_or_compute(frame);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  for (const auto& d : dash->diagnostics) std::cerr << "note: " << d << "\n";

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    std::cerr << "error: cannot create '" << out_dir << "': " << ec.message() << "\n";
    return 1;
  }
  auto write = [&](const fs::path& p, const std::string& body) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    f << body;
    f.close();
    if (!f) throw std::runtime_error("cannot write '" + p.string() + "'");
  };
  try {
    std::size_t files = 0;
    for (const auto& r : dash->recommendations) {
      for (std::size_t i = 0; i < r.vises.size(); ++i) {
        write(fs::path(out_dir) / (vis_id(r.action, i + 1) + ".json"), spec_doc_string(r.vises[i]));
        ++files;
      }
    }
    write(fs::path(out_dir) / "manifest.json", dashboard_manifest(*dash).dump(2) + "\n");
    std::cout << "wrote " << files << " spec files and manifest.json to " << out_dir << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto v = parse_int(trim(item));
    if (!v || *v <= 0) throw InvalidArgument("invalid width '" + item + "'");
    out.push_back(static_cast<std::size_t>(*v));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Always-on visualization recommendations for tabular data"};
  app.require_subcommand(1);

  OptimizerConfig env_config;
  try {
    env_config = OptimizerConfig::from_env();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t frames_per_session = kDefaultFramesPerSession;
  OptimizerFlags serve_flags;
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--port", port, "Listen port (0 for any)");
  serve->add_option("--frames-per-session", frames_per_session, "LRU capacity per session")->check(CLI::PositiveNumber);
  serve_flags.add(*serve);

  auto* recommend = app.add_subcommand("recommend", "Write the dashboard of a CSV file as spec documents");
  std::string input, intent_text, out_dir = ".", rec_level = "all-opt";
  OptimizerFlags rec_flags;
  recommend->add_option("input", input, "CSV file")->required();
  recommend->add_option("--intent", intent_text, "Comma-separated clauses, e.g. \"A,B=x\"");
  recommend->add_option("--out", out_dir, "Output directory");
  recommend->add_option("--opt-level", rec_level, "no-opt, wflow, wflow+prune or all-opt");
  rec_flags.add(*recommend);

  auto* bench = app.add_subcommand("bench", "Replay the notebook workload on synthetic data");
  BenchConfig bc;
  std::string levels_text = "no-opt,wflow,wflow+prune,all-opt", json_path, widths_text;
  bool no_recall = false;
  OptimizerFlags bench_flags;
  bench->add_option("--rows", bc.data.rows, "Synthetic rows")->check(CLI::PositiveNumber);
  bench->add_option("--cols", bc.data.cols, "Synthetic columns")->check(CLI::PositiveNumber);
  bench->add_option("--seed", bc.data.seed, "Generator seed");
  bench->add_option("--levels", levels_text, "Comma-separated opt levels");
  bench->add_option("--reps", bc.repetitions, "Repetitions per level")->check(CLI::PositiveNumber);
  bench->add_option("--json", json_path, "Write the machine-readable report here");
  bench->add_option("--widths", widths_text, "Also time a single print at these widths, e.g. 10,20,40");
  bench->add_flag("--no-recall", no_recall, "Skip the Recall@k measurement");
  bool no_workload = false;
  bench->add_flag("--no-workload", no_workload, "Skip the notebook workload");
  bench_flags.add(*bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*serve) {
      ServerConfig sc;
      sc.host = host;
      sc.port = port;
      sc.frames_per_session = frames_per_session;
      sc.optimizer = serve_flags.apply(env_config);
      Server server(sc);
      int bound = server.bind();
      std::cout << "listening on http://" << host << ":" << bound << std::endl;
      server.run();
      return 0;
    }
    if (*recommend) return run_recommend(input, intent_text, out_dir, rec_level, rec_flags.apply(env_config));

    bc.optimizer = bench_flags.apply(env_config);
    bc.recall = !no_recall;
    bc.run_workload = !no_workload;
    bc.levels.clear();
    std::stringstream ss(levels_text);
    for (std::string item; std::getline(ss, item, ',');) {
      auto l = parse_opt_level(trim(item));
      if (!l) throw InvalidArgument("unknown opt level '" + item + "'");
      bc.levels.push_back(*l);
    }
    auto report = run_benchmark(bc);
    auto j = report.to_json();
    std::cout << report.to_table();
    if (!widths_text.empty()) {
      auto widths = parse_sizes(widths_text);
      nlohmann::ordered_json wj = nlohmann::ordered_json::array();
      for (auto level : bc.levels) {
        std::vector<double> x, y;
        for (auto w : widths) {
          auto cfg = bc.data;
          cfg.cols = w;
          x.push_back(static_cast<double>(w));
          y.push_back(time_single_print(make_synthetic(cfg), level, bc.optimizer, bc.repetitions));
        }
        auto fit = fit_power(x, y);
        std::cout << "width " << to_string(level) << ": t = " << fit.a << " + " << fit.b << " * w^" << fit.c << "\n";
        wj.push_back({{"level", to_string(level)}, {"widths", x}, {"seconds", y}, {"a", fit.a}, {"b", fit.b}, {"c", fit.c}});
      }
      j["width_scaling"] = std::move(wj);
    }
    if (!json_path.empty()) {
      std::ofstream f(json_path);
      f << j.dump(2) << "\n";
      if (!f) {
        std::cerr << "error: cannot write '" << json_path << "'\n";
        return 1;
      }
    }
    return 0;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
