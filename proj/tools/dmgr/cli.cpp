// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <atomic>
#include <csignal>
#include <fstream>
#include <functional>
#include <optional>

#include "CLI11.hpp"
#include "dmgr/eval/evaluate.hpp"
#include "dmgr/nn/checkpoint.hpp"
#include "dmgr/run/workspace.hpp"
#include "dmgr/service/http_server.hpp"

namespace dmgr::cli {

namespace {

struct Common {
  std::string config;
  std::string corpus;
  std::string out_dir;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "run config JSON");
  cmd->add_option("--corpus", c.corpus, "corpus file (overrides the config)");
  cmd->add_option("--out-dir", c.out_dir, "output directory (overrides the config)");
}

run::RunConfig load_config(const Common& c) {
  run::RunConfig cfg;
  if (!c.config.empty()) {
    try {
      cfg = run::load_run_config(c.config);
    } catch (const ParseError& e) {
      throw ConfigError(c.config + ": " + e.what());
    }
  }
  if (!c.corpus.empty()) cfg.corpus.file = c.corpus;
  if (!c.out_dir.empty()) cfg.out_dir = c.out_dir;
  return cfg;
}

void validate(const run::RunConfig& cfg) {
  try {
    cfg.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
}

std::filesystem::path ensure_dir(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  return dir;
}

nn::ParamSet params_for(const run::Workspace& ws, const std::string& checkpoint) {
  return checkpoint.empty() ? ws.init_params() : ws.load_params(checkpoint);
}

std::atomic<service::HttpServer*> g_server{nullptr};

extern "C" void on_signal(int) {
  if (auto* s = g_server.load()) s->stop();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dialog-based interactive retrieval: corpus, training, evaluation and serving",
               "dmgr"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  app.set_help_all_flag("--help-all", "expand every subcommand");
  std::function<int()> action;

  // gen-corpus
  Common gc;
  std::optional<std::uint64_t> gc_seed;
  std::optional<std::size_t> gc_n;
  std::optional<double> gc_fraction;
  std::string gc_out;
  auto* gen = app.add_subcommand("gen-corpus", "generate a synthetic corpus file");
  add_common(gen, gc);
  gen->add_option("--seed", gc_seed, "corpus seed");
  gen->add_option("--n", gc_n, "number of items");
  gen->add_option("--train-fraction", gc_fraction, "share of items in the training split");
  gen->add_option("--out", gc_out, "output path")->required();
  gen->callback([&] {
    action = [&] {
      auto cfg = load_config(gc);
      if (gc_seed) cfg.corpus.seed = *gc_seed;
      if (gc_n) cfg.corpus.n = *gc_n;
      if (gc_fraction) cfg.corpus.train_fraction = *gc_fraction;
      validate(cfg);
      const auto corpus =
          corpus::generate_corpus(cfg.corpus.seed, cfg.corpus.n, cfg.corpus.train_fraction);
      corpus::save_corpus(corpus, gc_out);
      out << "wrote " << gc_out << " (" << corpus.size() << " items, " << corpus.train.size()
          << " train / " << corpus.test.size() << " test)\n";
      return kExitOk;
    };
  });

  // train
  Common tc;
  std::string phase_name = "sl";
  std::string init;
  std::optional<std::uint64_t> t_seed;
  std::optional<std::size_t> t_epochs, t_episodes;
  auto* train = app.add_subcommand("train", "train one phase and write checkpoints");
  add_common(train, tc);
  train->add_option("--phase", phase_name, "sl, mbpi or scst")
      ->check(CLI::IsMember({"sl", "mbpi", "scst"}));
  train->add_option("--init", init, "start from this checkpoint");
  train->add_option("--seed", t_seed, "training seed");
  train->add_option("--epochs", t_epochs, "epochs for this phase");
  train->add_option("--episodes-per-epoch", t_episodes, "0 = one per training item");
  train->callback([&] {
    action = [&] {
      auto cfg = load_config(tc);
      const auto phase = training::parse_phase(phase_name);
      if (t_seed) cfg.train.seed = *t_seed;
      if (t_epochs) (phase == training::Phase::sl ? cfg.train.sl_epochs : cfg.train.rl_epochs) = *t_epochs;
      if (t_episodes) cfg.train.episodes_per_epoch = *t_episodes;
      validate(cfg);
      run::Workspace ws(cfg);
      const auto dir = ensure_dir(std::filesystem::path(cfg.out_dir) / phase_name);
      auto result = training::train(ws.training_env(), params_for(ws, init),
                                    cfg.train_config(phase), training::TrainOutput{dir});
      for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
        out << phase_name << " epoch " << e + 1 << " loss " << result.epoch_loss[e]
            << " percentile " << result.epoch_percentile[e] << "\n";
      }
      const auto ckpt = dir / (phase_name + ".ckpt");
      run::write_manifest(dir / "manifest.json", cfg,
                          {"train", phase_name, ckpt.string(), init, "", (dir / "metrics.csv").string()});
      out << "checkpoint " << ckpt.string() << "\n";
      return kExitOk;
    };
  });

  // eval
  Common ec;
  std::string e_ckpt, e_policy = "manager", e_method = "sl", e_id, e_out, e_curve, e_traces;
  std::optional<std::uint64_t> e_seed;
  std::optional<std::size_t> e_episodes;
  auto* ev = app.add_subcommand("eval", "per-turn ranking percentile on the test split");
  add_common(ev, ec);
  ev->add_option("--checkpoint", e_ckpt, "trained parameters (default: fresh init)");
  ev->add_option("--policy", e_policy, "manager, oracle or random-state")
      ->check(CLI::IsMember({"manager", "oracle", "random-state"}));
  ev->add_option("--method", e_method, "label used in comparison tables");
  ev->add_option("--id", e_id, "config id (default <method>-<channel>)");
  ev->add_option("--seed", e_seed, "evaluation seed");
  ev->add_option("--episodes", e_episodes, "number of episodes");
  ev->add_option("--out", e_out, "report path (default <out-dir>/eval-<id>.json)");
  ev->add_option("--curve", e_curve, "also write the turn curve CSV here");
  ev->add_option("--traces", e_traces, "also write episode traces (JSONL) here");
  ev->callback([&] {
    action = [&] {
      auto cfg = load_config(ec);
      if (e_seed) cfg.eval.seed = *e_seed;
      if (e_episodes) cfg.eval.episodes = *e_episodes;
      validate(cfg);
      run::Workspace ws(cfg);
      const auto params = params_for(ws, e_ckpt);
      std::unique_ptr<manager::Policy> policy;
      if (e_policy == "oracle") {
        policy = std::make_unique<manager::OraclePolicy>(ws.bank());
      } else if (e_policy == "random-state") {
        policy = std::make_unique<manager::RandomStatePolicy>(ws.bank().dim());
      } else {
        policy = std::make_unique<manager::ManagerPolicy>(ws.model(), params, ws.bank());
      }
      const std::string id = e_id.empty() ? e_method + "-" + ws.simulator().config().name() : e_id;
      std::vector<manager::EpisodeTrace> traces;
      const auto report = eval::evaluate(*policy, ws.test_set(), ws.simulator(), cfg.eval, id,
                                         e_traces.empty() ? nullptr : &traces);
      const std::filesystem::path path =
          e_out.empty() ? ensure_dir(cfg.out_dir) / ("eval-" + id + ".json") : std::filesystem::path(e_out);
      eval::save_report(report, path);
      if (!e_curve.empty()) {
        std::ofstream(e_curve, std::ios::binary) << eval::turn_curve_export(report);
      }
      if (!e_traces.empty()) {
        std::ofstream f(e_traces, std::ios::binary);
        for (const auto& t : traces) f << manager::trace_to_json_line(t) << "\n";
      }
      run::write_manifest(path.string() + ".manifest.json", cfg,
                          {"eval", e_method, e_ckpt, "", path.string(), ""});
      for (std::size_t t = 0; t < report.mean.size(); ++t) {
        out << id << " turn " << t + 1 << " mean " << report.mean[t] << " std " << report.std[t]
            << "\n";
      }
      out << "report " << path.string() << "\n";
      return kExitOk;
    };
  });

  // simulate
  Common sc;
  std::string s_ckpt, s_out, s_mode = "greedy";
  std::optional<std::uint64_t> s_seed;
  std::size_t s_episodes = 10;
  auto* sim = app.add_subcommand("simulate", "write simulated episode traces as JSONL");
  add_common(sim, sc);
  sim->add_option("--checkpoint", s_ckpt, "trained parameters (default: fresh init)");
  sim->add_option("--episodes", s_episodes, "number of episodes");
  sim->add_option("--seed", s_seed, "episode seed");
  sim->add_option("--mode", s_mode, "greedy or stochastic")
      ->check(CLI::IsMember({"greedy", "stochastic"}));
  sim->add_option("--out", s_out, "output path (default stdout)");
  sim->callback([&] {
    action = [&] {
      auto cfg = load_config(sc);
      if (s_seed) cfg.eval.seed = *s_seed;
      cfg.eval.episodes = s_episodes;
      validate(cfg);
      run::Workspace ws(cfg);
      const auto params = params_for(ws, s_ckpt);
      manager::ManagerPolicy policy(ws.model(), params, ws.bank());
      manager::EpisodeOptions opts;
      opts.horizon = cfg.eval.horizon;
      opts.top_k = cfg.eval.top_k;
      opts.mode = manager::parse_mode(s_mode);
      std::ofstream file;
      if (!s_out.empty()) {
        file.open(s_out, std::ios::binary);
        if (!file) throw Error("cannot write " + s_out);
      }
      std::ostream& sink = s_out.empty() ? out : file;
      for (const auto& p : eval::plan_episodes(ws.test_set(), cfg.eval)) {
        const auto trace = manager::run_episode(policy, ws.test_set(), ws.simulator(), p.target,
                                                opts, p.episode_seed);
        sink << manager::trace_to_json_line(trace) << "\n";
      }
      return kExitOk;
    };
  });

  // serve
  Common vc;
  std::string v_ckpt, v_host = "127.0.0.1", v_log, v_static;
  int v_port = 8080;
  auto* serve = app.add_subcommand("serve", "run the HTTP session service");
  add_common(serve, vc);
  serve->add_option("--checkpoint", v_ckpt, "trained parameters (default: fresh init)");
  serve->add_option("--host", v_host, "bind address");
  serve->add_option("--port", v_port, "port (0 = any free port)");
  serve->add_option("--log", v_log, "append session events to this JSONL file");
  serve->add_option("--static", v_static, "serve files from this directory at /");
  serve->callback([&] {
    action = [&] {
      auto cfg = load_config(vc);
      validate(cfg);
      run::Workspace ws(cfg);
      const auto params = params_for(ws, v_ckpt);
      service::SessionEngine engine(ws.model(), params, ws.corpus(), ws.test_set(),
                                    ws.simulator(), {cfg.eval.horizon, cfg.eval.top_k});
      service::SessionService svc(
          engine, {v_ckpt.empty() ? "init" : v_ckpt,
                   cfg.corpus.file.empty() ? "generated" : cfg.corpus.file, v_log});
      service::HttpServer server(svc, v_static);
      const int port = server.bind(v_host, v_port);
      out << "listening on http://" << v_host << ":" << port << std::endl;
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      server.run();
      g_server = nullptr;
      return kExitOk;
    };
  });

  // compare
  std::vector<std::string> c_reports;
  std::string c_out;
  auto* cmp = app.add_subcommand("compare", "align eval reports into one CSV table");
  Common cc;
  add_common(cmp, cc);
  cmp->add_option("reports", c_reports, "report files; the first is the reference")->required();
  cmp->add_option("--out", c_out, "output CSV (default stdout)");
  cmp->callback([&] {
    action = [&] {
      std::vector<eval::CompareEntry> entries;
      for (const auto& path : c_reports) {
        auto report = eval::load_report(path);
        const auto& id = report.config_id;
        const auto dash = id.find('-');
        eval::CompareEntry e{id, id.substr(0, dash),
                             dash == std::string::npos ? "" : id.substr(dash + 1), report};
        entries.push_back(std::move(e));
      }
      const auto csv = eval::compare(entries);
      if (c_out.empty()) {
        out << csv;
      } else {
        std::ofstream(c_out, std::ios::binary) << csv;
      }
      return kExitOk;
    };
  });

  // curve
  std::string u_report, u_out;
  auto* curve = app.add_subcommand("curve", "export the per-turn curve of one report");
  Common uc;
  add_common(curve, uc);
  curve->add_option("report", u_report, "eval report")->required();
  curve->add_option("--out", u_out, "output CSV (default stdout)");
  curve->callback([&] {
    action = [&] {
      const auto csv = eval::turn_curve_export(eval::load_report(u_report));
      if (u_out.empty()) {
        out << csv;
      } else {
        std::ofstream(u_out, std::ios::binary) << csv;
      }
      return kExitOk;
    };
  });

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitConfig;
  }

  try {
    return action ? action() : kExitConfig;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace dmgr::cli
