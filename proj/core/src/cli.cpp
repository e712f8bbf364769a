#include "kbench/cli.hpp"

#include <atomic>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <memory>
#include <thread>

#include <CLI11.hpp>

#include "kbench/clock.hpp"
#include "kbench/config.hpp"
#include "kbench/errors.hpp"
#include "kbench/k8s_backend.hpp"
#include "kbench/k8s_sim.hpp"
#include "kbench/local_backend.hpp"
#include "kbench/report.hpp"
#include "kbench/testkit.hpp"

namespace kbench::cli {

namespace {

std::atomic<bool> g_interrupted{false};

void handle_sigint(int) { g_interrupted.store(true); }

struct RunArgs {
    std::string config_path;
    std::string suite_path;
    std::string system_filter = "*";
    std::string namespace_override;
    std::string context_override;
    std::size_t concurrency = 4;
    std::string output_root = "output";
    double timeout = 0;  // default time limit for tests that set none
    bool dry_run = false;
    std::string sim_scenario;
    bool system_clock = false;
    std::string api_server;
    std::string api_token;
    bool insecure = false;
    std::string report_file = "perf_report.json";
};

struct ListArgs {
    std::string config_path;
    std::string suite_path;
    std::string system_filter = "*";
};

struct SimArgs {
    std::string scenario_path;
    int port = 0;
    double duration = 0;  // 0: serve until interrupted
};

int worst_exit_code(const testkit::SuiteOutcome& outcome) {
    if (!outcome.infra_errors.empty()) return kExitInfrastructure;
    for (const auto& result : outcome.results)
        if (result.status != testkit::TestStatus::Pass) return kExitTestFailure;
    return kExitPass;
}

int cmd_run(const RunArgs& args, const CLI::App& run_cmd, std::ostream& out, std::ostream& err) {
    g_interrupted.store(false);
    std::signal(SIGINT, handle_sigint);

    auto cfg = config::load_site_config(args.config_path);
    for (const auto& warning : cfg.warnings) err << "warning: " << warning << "\n";
    auto suite = testkit::SuiteFile::load(args.suite_path);

    const bool sim_mode = !args.sim_scenario.empty();
    std::unique_ptr<Clock> clock;
    if (sim_mode && !args.system_clock)
        clock = std::make_unique<VirtualClock>();
    else
        clock = std::make_unique<SystemClock>();

    std::unique_ptr<sim::SimServer> simulator;
    sched::BackendRegistry registry;
    registry.add(std::make_shared<sched::LocalBackend>(*clock));
    if (sim_mode) {
        simulator = std::make_unique<sim::SimServer>(sim::Scenario::load(args.sim_scenario), *clock);
        auto endpoint = simulator->start();
        out << "simulator listening on " << endpoint.base_url << "\n";
        k8s::K8sBackendOptions options;
        if (!args.system_clock) {
            options.poll_interval = 0.2;
            options.log_poll_interval = 0.1;
        }
        registry.add(std::make_shared<k8s::K8sBackend>(endpoint, *clock, options));
    } else if (!args.api_server.empty()) {
        k8s::ApiEndpoint endpoint;
        endpoint.base_url = args.api_server;
        endpoint.token = args.api_token;
        endpoint.verify_tls = !args.insecure;
        registry.add(std::make_shared<k8s::K8sBackend>(endpoint, *clock));
    } else {
        registry.add(
            std::make_shared<k8s::K8sBackend>(*clock, k8s::K8sBackendOptions{}, k8s::system_env()));
    }

    testkit::SuiteOptions options;
    options.filter = args.system_filter;
    options.concurrency = args.concurrency;
    options.pipeline.output_root = args.output_root;
    if (run_cmd.count("--namespace")) options.pipeline.cli_namespace = args.namespace_override;
    if (run_cmd.count("--context")) options.pipeline.cli_context = args.context_override;
    if (args.timeout > 0) options.pipeline.default_time_limit = args.timeout;

    if (args.dry_run) {
        auto instances = testkit::plan_suite(suite.tests, cfg, options, suite.base_dir);
        for (const auto& instance : instances) {
            out << "--- " << instance.qualified_name() << " (scheduler "
                << instance.partition.scheduler << ")\n";
            out << document_to_yaml(instance.manifest.doc);
        }
        out << instances.size() << " instance(s), nothing submitted\n";
        return kExitPass;
    }

    sched::CancelToken cancel;
    std::thread interrupt_watch([&cancel] {
        while (!cancel.requested()) {
            if (g_interrupted.load()) {
                cancel.request();
                break;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(20));
        }
    });

    testkit::SuiteOutcome outcome;
    try {
        outcome = testkit::run_suite(suite.tests, cfg, registry, options, suite.base_dir, &cancel);
    } catch (...) {
        cancel.request();
        interrupt_watch.join();
        throw;
    }
    cancel.request();
    interrupt_watch.join();

    std::filesystem::create_directories(args.output_root);
    const auto report_path = std::filesystem::path(args.output_root) / args.report_file;
    report::write_perf_report(outcome, report_path);

    out << report::render_suite_summary(outcome);
    const auto report_doc = report::perf_report_document(outcome);
    if (!report_doc.empty()) out << "\n" << report::render_perf_table(report_doc);
    out << "perf report written to " << report_path.string() << "\n";
    return worst_exit_code(outcome);
}

int cmd_list(const ListArgs& args, std::ostream& out) {
    auto cfg = config::load_site_config(args.config_path);
    auto suite = testkit::SuiteFile::load(args.suite_path);
    testkit::SuiteOptions options;
    options.filter = args.system_filter;
    auto instances = testkit::plan_suite(suite.tests, cfg, options, suite.base_dir);
    for (const auto& instance : instances)
        out << instance.system_name << ":" << instance.partition.name << "  "
            << instance.display_name() << "\n";
    out << instances.size() << " tests\n";
    return kExitPass;
}

int cmd_report(const std::string& path, std::ostream& out) {
    auto report_doc = report::load_perf_report(path);
    out << report::render_perf_table(report_doc);
    return kExitPass;
}

int cmd_sim(const SimArgs& args, std::ostream& out) {
    g_interrupted.store(false);
    std::signal(SIGINT, handle_sigint);

    SystemClock clock;
    sim::SimServer server(sim::Scenario::load(args.scenario_path), clock);
    auto endpoint = server.start(args.port);
    out << "simulator listening on " << endpoint.base_url << "\n";
    out.flush();

    const double start = clock.now();
    while (!g_interrupted.load()) {
        if (args.duration > 0 && clock.now() - start >= args.duration) break;
        clock.sleep_for(0.05);
    }
    server.stop();
    return kExitPass;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"kbench - benchmark and regression-test orchestrator"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run_cmd = app.add_subcommand("run", "Run a test suite against a configured system");
    run_cmd->add_option("-C,--config", run_args.config_path, "Site configuration file")->required();
    run_cmd->add_option("-c,--checkpath,--suite", run_args.suite_path, "Test suite file")->required();
    run_cmd->add_option("-s,--system", run_args.system_filter,
                        "system:partition filter (wildcards allowed)");
    run_cmd->add_option("--namespace", run_args.namespace_override,
                        "Kubernetes namespace override (below per-test settings)");
    run_cmd->add_option("--context", run_args.context_override,
                        "Kubernetes context override (below per-test settings)");
    run_cmd->add_option("-j,--concurrency", run_args.concurrency,
                        "Simultaneous test instances (default 4)");
    run_cmd->add_option("-o,--output-root", run_args.output_root, "Output directory tree root");
    run_cmd->add_option("--timeout", run_args.timeout,
                        "Default time limit in seconds for tests that set none");
    run_cmd->add_flag("--dry-run", run_args.dry_run,
                      "Print expanded instances and mutated manifests, submit nothing");
    run_cmd->add_option("--sim", run_args.sim_scenario,
                        "Run against an in-process cluster simulator with this scenario file");
    run_cmd->add_flag("--system-clock", run_args.system_clock,
                      "Use the wall clock in simulator mode (default: virtual clock)");
    run_cmd->add_option("--api-server", run_args.api_server,
                        "Kubernetes API base URL (bypasses kubeconfig resolution)");
    run_cmd->add_option("--token", run_args.api_token, "Bearer token for --api-server");
    run_cmd->add_flag("--insecure", run_args.insecure, "Skip TLS verification for --api-server");
    run_cmd->add_option("--report-file", run_args.report_file,
                        "Perf report filename under the output root");

    ListArgs list_args;
    auto* list_cmd = app.add_subcommand("list", "List test instances after parameter expansion");
    list_cmd->add_option("-C,--config", list_args.config_path, "Site configuration file")->required();
    list_cmd->add_option("-c,--checkpath,--suite", list_args.suite_path, "Test suite file")
        ->required();
    list_cmd->add_option("-s,--system", list_args.system_filter, "system:partition filter");

    std::string report_path;
    auto* report_cmd = app.add_subcommand("report", "Render a previously written perf report");
    report_cmd->add_option("file", report_path, "Perf report JSON file")->required();

    SimArgs sim_args;
    auto* sim_cmd = app.add_subcommand("sim", "Serve a cluster simulator scenario over HTTP");
    sim_cmd->add_option("scenario", sim_args.scenario_path, "Scenario file")->required();
    sim_cmd->add_option("--port", sim_args.port, "Port to bind (default: ephemeral)");
    sim_cmd->add_option("--duration", sim_args.duration,
                        "Stop after this many seconds (default: run until interrupted)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitPass;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (run_cmd->parsed()) return cmd_run(run_args, *run_cmd, out, err);
        if (list_cmd->parsed()) return cmd_list(list_args, out);
        if (report_cmd->parsed()) return cmd_report(report_path, out);
        if (sim_cmd->parsed()) return cmd_sim(sim_args, out);
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NotFoundError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const PathError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const PatternError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInfrastructure;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitInfrastructure;
    }
    return kExitUsage;
}

int run_cli(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace kbench::cli
