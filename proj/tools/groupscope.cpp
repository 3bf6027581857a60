// Copyright 2026 The GroupScope Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line driver: `groupscope <stage> --config <path>` and
// `groupscope serve --config <path> --port N`.

#include <CLI11.hpp>
#include <csignal>
#include <functional>
#include <iostream>
#include <optional>

#include "groupscope/econometrics.hpp"
#include "groupscope/embed.hpp"
#include "groupscope/pipeline.hpp"
#include "groupscope/review.hpp"

namespace gs = groupscope;
namespace pl = groupscope::pipeline;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kInvalid = 2, kDependency = 3, kConfigMismatch = 4, kTransport = 5 };

gs::review::ReviewServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

void print_result(const pl::StageResult& r) {
  std::cout << pl::to_string(r.stage) << ":";
  for (const auto& [name, digest] : r.outputs) std::cout << " " << name << "=" << digest.substr(0, 12);
  std::cout << "\n";
  for (const auto& n : r.notes) std::cout << "  " << n << "\n";
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
}

int run(const std::function<void()>& body) {
  try {
    body();
    return kOk;
  } catch (const pl::ConfigMismatchError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigMismatch;
  } catch (const gs::DependencyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDependency;
  } catch (const gs::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const gs::embed::TransportError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kTransport;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Social-group appeal detection and analysis pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  bool force = false;
  bool no_cache = false;

  std::vector<std::pair<CLI::App*, std::optional<pl::Stage>>> stage_commands;
  for (pl::Stage s : pl::all_stages()) {
    auto* sub = app.add_subcommand(std::string(pl::to_string(s)), "Run the " + std::string(pl::to_string(s)) + " stage");
    stage_commands.emplace_back(sub, s);
  }
  stage_commands.emplace_back(app.add_subcommand("all", "Run every stage in order"), std::nullopt);
  for (auto& [sub, stage] : stage_commands) {
    sub->add_option("--config", config_path, "Pipeline configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_flag("--force", force, "Run even if the output directory holds a run with another configuration");
    sub->add_flag("--no-cache", no_cache, "Call the LLM even when a cached transcript exists");
  }

  int port = 8080;
  std::string host = "127.0.0.1";
  auto* serve = app.add_subcommand("serve", "Serve the review API");
  serve->add_option("--config", config_path, "Pipeline configuration (JSON)")->required()->check(CLI::ExistingFile);
  serve->add_option("--port", port, "Port to listen on (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve->add_option("--host", host, "Address to bind");

  CLI11_PARSE(app, argc, argv);

  for (auto& [sub, stage] : stage_commands) {
    if (!sub->parsed()) continue;
    return run([&, stage = stage] {
      pl::PipelineConfig config = pl::load_config(config_path);
      pl::RunOptions options;
      options.force = force;
      options.no_cache = no_cache;
      if (stage) {
        print_result(pl::run_stage(*stage, config, options));
      } else {
        for (const auto& r : pl::run_all(config, options)) print_result(r);
      }
    });
  }

  return run([&] {
    pl::PipelineConfig config = pl::load_config(config_path);
    gs::review::ReviewService service(config);
    gs::review::ReviewServer server(service);
    int bound = server.bind(host, port);
    if (bound < 0) throw gs::IoError("cannot bind " + host + ":" + std::to_string(port));
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cout << "review API listening on http://" << host << ":" << bound << std::endl;
    server.listen();
    g_server = nullptr;
  });
}
