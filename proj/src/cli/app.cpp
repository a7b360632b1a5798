#include "emi/cli/app.hpp"

#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "emi/cli/config.hpp"
#include "emi/cli/stages.hpp"
#include "emi/mockserve.hpp"

namespace emi::cli {

namespace {

struct Options {
  std::string config;
  std::string out;
  bool force = false;
  std::size_t jobs = 1;
  std::optional<std::size_t> limit;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
  bool quiet = false;
  std::string mock_rules;
  // mockserve
  std::string rules;
  std::string host = "127.0.0.1";
  int port = 8089;
};

void add_pipeline_options(CLI::App& cmd, Options& o) {
  cmd.add_option("-c,--config", o.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  cmd.add_option("-o,--out", o.out, "Output directory (overrides out_dir)");
  cmd.add_flag("-f,--force", o.force, "Rerun even when up to date or configured differently");
  cmd.add_option("-j,--jobs", o.jobs, "Upper bound on parallel requests and workers")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--limit", o.limit, "Cap the number of segments passed downstream");
  cmd.add_option("--seed", o.seed, "Override the panel and analysis seeds");
  cmd.add_option("--mock", o.mock_rules,
                 "Start an in-process mock server with these rules and route all endpoints to it")
      ->check(CLI::ExistingFile);
}

int run_pipeline(const std::string& command, const Options& o) {
  auto config = RunConfig::load(o.config);
  if (!o.out.empty()) config.out_dir = fs::absolute(o.out);
  if (o.seed) {
    config.panel_seed = *o.seed;
    config.analysis_seed = *o.seed;
  }

  std::unique_ptr<mock::MockServer> server;
  if (!o.mock_rules.empty()) {
    server = std::make_unique<mock::MockServer>(mock::MockRules::load(o.mock_rules));
    server->start("127.0.0.1", 0);
    for (auto& e : config.raters) e.base_url = server->base_url();
    config.embedder.base_url = server->base_url();
    spdlog::info("mock server listening at {}", server->base_url());
  }
  config.validate();

  StageContext ctx;
  ctx.config = std::move(config);
  ctx.jobs = o.jobs;
  ctx.limit = o.limit;
  ctx.force = o.force;

  const auto outcomes = command == "run-all" ? run_all(ctx) : std::vector<StageOutcome>{run_stage(command, ctx)};
  for (const auto& r : outcomes) {
    if (o.quiet) break;
    std::cout << r.stage << ": " << (r.skipped ? "up to date" : "done") << " " << r.counts.dump() << "\n";
  }
  if (server) server->stop();
  return 0;
}

}  // namespace

int run_main(const std::vector<std::string>& args) {
  CLI::App app{"Epistemic orientation (EMI) pipeline: corpus to panel inference"};
  app.require_subcommand(1);
  Options o;
  app.add_flag("-v,--verbose", o.verbose, "Log progress");
  app.add_flag("-q,--quiet", o.quiet, "Print nothing on success");

  std::vector<std::pair<std::string, std::string>> commands = {
      {"ingest", "Read corpus files, drop chair speeches and duplicates"},
      {"preprocess", "Apply lexical filters and chunk speeches into segments"},
      {"rate", "Procedural filter and epistemic ratings from every chat endpoint"},
      {"embed", "Anchor-similarity scores from the embedding endpoint"},
      {"fuse", "Standardize and average the two score components"},
      {"panel", "Yearly means with bootstrap intervals joined to indicators"},
      {"analyze", "Fixed-effects models, diagnostics, comparisons and bootstrap tests"},
      {"validate", "AUC against human annotations and a paired DeLong test"},
      {"plot", "Trend and scatter figures as SVG"},
      {"run-all", "Every stage in order"},
  };
  for (const auto& [name, help] : commands) {
    auto* cmd = app.add_subcommand(name, help);
    add_pipeline_options(*cmd, o);
    cmd->fallthrough();
  }
  auto* serve = app.add_subcommand("mockserve", "Serve the deterministic mock chat and embedding API");
  serve->add_option("--rules", o.rules, "Mock rules (JSON)")->required()->check(CLI::ExistingFile);
  serve->add_option("--host", o.host, "Bind address");
  serve->add_option("--port", o.port, "Port");
  serve->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  spdlog::set_level(o.verbose ? spdlog::level::info : spdlog::level::warn);

  try {
    const auto* cmd = app.get_subcommands().front();
    if (cmd->get_name() == "mockserve") {
      mock::MockServer server(mock::MockRules::load(o.rules));
      std::cout << "mock server on http://" << o.host << ":" << o.port << std::endl;
      server.serve(o.host, o.port);
      return 0;
    }
    return run_pipeline(cmd->get_name(), o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace emi::cli
