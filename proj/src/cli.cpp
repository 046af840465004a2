#include "pairscore/cli.hpp"

#include "pairscore/analytics.hpp"
#include "pairscore/api.hpp"
#include "pairscore/csv.hpp"
#include "pairscore/datastore.hpp"
#include "pairscore/json_io.hpp"
#include "pairscore/pipeline.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <pthread.h>
#include <sstream>
#include <thread>

namespace pairscore::cli {

namespace {

struct ParseFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Comparisons from a public CSV file, deduplicated like the datastore does.
/// Any rejected row is a parse failure.
std::vector<Comparison> load_comparisons(const std::string& path, std::ostream& err) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseFailure("cannot open " + path);
    Datastore scratch;
    ImportReport report;
    try {
        report = scratch.import_csv(in);
    } catch (const ValidationError& e) {
        throw ParseFailure(path + ": " + e.what());
    }
    if (!report.rejected.empty()) {
        for (const auto& r : report.rejected) err << path << ":" << r.line << ": " << r.reason << "\n";
        throw ParseFailure(std::to_string(report.rejected.size()) + " malformed row(s) in " + path);
    }
    return scratch.comparisons();
}

struct FitFlags {
    std::string input;
    std::string criterion = "all";
    Hyperparams h;
    std::string method = "newton";
};

void add_fit_flags(CLI::App& cmd, FitFlags& f) {
    cmd.add_option("--lambda", f.h.lambda, "Regularization strength")->capture_default_str();
    cmd.add_option("--nu", f.h.nu, "Global-score shrinkage")->capture_default_str();
    cmd.add_option("--c", f.h.c_weight, "Comparison-count half weight")->capture_default_str();
    cmd.add_option("--max-iters", f.h.max_iters, "Iteration cap")->capture_default_str();
    cmd.add_option("--grad-tol", f.h.grad_tol, "Gradient max-norm tolerance")->capture_default_str();
    cmd.add_option("--method", f.method, "newton or gradient_descent")
        ->check(CLI::IsMember({"newton", "gradient_descent"}))
        ->capture_default_str();
}

Hyperparams finish(FitFlags& f) {
    f.h.method = f.method == "newton" ? SolverMethod::Newton : SolverMethod::GradientDescent;
    validate(f.h);
    return f.h;
}

std::vector<Criterion> criteria_from(const std::string& text) {
    if (text == "all") return Criterion::all();
    try {
        std::size_t used = 0;
        const int id = std::stoi(text, &used);
        if (used == text.size()) return {Criterion(id)};
    } catch (const std::logic_error&) {
    }
    throw ValidationError("--criterion must be 1..10 or all, got " + text);
}

Snapshot fit_all(const std::vector<Comparison>& comparisons, const Hyperparams& h,
                 const std::vector<Criterion>& criteria) {
    std::set<ContributorId> everyone;
    for (const auto& c : comparisons) everyone.insert(c.contributor);
    return fit_snapshot(comparisons, everyone, entity_universe(comparisons), h, criteria);
}

void print_diagnostics(const Snapshot& s, std::ostream& out) {
    for (const auto& b : s.boards) {
        out << "criterion " << b.criterion.id() << " (" << b.criterion.name() << "): "
            << b.rho.size() << " entities, " << b.theta.size() << " contributors, iterations "
            << b.diagnostics.iterations << ", grad_norm " << std::setprecision(3) << std::scientific
            << b.diagnostics.grad_norm << ", loss " << std::defaultfloat << std::setprecision(10)
            << b.diagnostics.loss << ", " << (b.diagnostics.converged ? "converged" : "NOT CONVERGED")
            << "\n";
    }
}

int cmd_fit(FitFlags& f, const std::string& out_path, std::ostream& out, std::ostream& err) {
    const auto h = finish(f);
    const auto criteria = criteria_from(f.criterion);
    const auto comparisons = load_comparisons(f.input, err);
    const auto s = fit_all(comparisons, h, criteria);
    write_snapshot_file(s, out_path);
    out << "snapshot " << s.id << " written to " << out_path << "\n";
    print_diagnostics(s, out);
    if (s.any_unconverged()) {
        err << "warning: solver did not converge on every criterion\n";
        return kExitNotConverged;
    }
    return kExitOk;
}

int cmd_analyze(FitFlags& f, const std::string& snapshot_path, bool top_decile,
                const std::string& out_path, std::ostream& out, std::ostream& err) {
    const auto h = finish(f);
    const auto comparisons = load_comparisons(f.input, err);
    Snapshot s;
    if (!snapshot_path.empty()) {
        s = read_snapshot_file(snapshot_path);
        validate_complete(s);
    } else {
        s = fit_all(comparisons, h, Criterion::all());
    }
    const auto entities = entity_universe(comparisons);
    auto report = json_io::to_json(build_report(comparisons, s.score_matrix(), entities));
    if (!top_decile) report.erase("correlations_top_decile");
    report["snapshot_id"] = s.id;
    report["hyperparams"] = json_io::to_json(s.hyperparams);
    const auto text = report.dump(2) + "\n";
    if (out_path.empty()) {
        out << text;
    } else {
        std::ofstream file(out_path, std::ios::binary | std::ios::trunc);
        if (!file) throw std::runtime_error("cannot write " + out_path);
        file << text;
        out << "report written to " << out_path << "\n";
    }
    return s.any_unconverged() ? kExitNotConverged : kExitOk;
}

int cmd_import(const std::string& data_dir, const std::string& input, std::ostream& out,
               std::ostream& err) {
    std::ifstream in(input, std::ios::binary);
    if (!in) throw ParseFailure("cannot open " + input);
    Datastore store{std::filesystem::path(data_dir)};
    ImportReport report;
    try {
        report = store.import_csv(in);
    } catch (const ValidationError& e) {
        throw ParseFailure(input + ": " + e.what());
    }
    out << "imported " << report.imported << " row(s), rejected " << report.rejected.size() << "\n";
    for (const auto& r : report.rejected) err << input << ":" << r.line << ": " << r.reason << "\n";
    return kExitOk;
}

int cmd_export(const std::string& data_dir, const std::string& out_path, std::ostream& out) {
    Datastore store{std::filesystem::path(data_dir)};
    if (out_path.empty() || out_path == "-") {
        store.export_public_csv(out);
        return kExitOk;
    }
    std::ofstream file(out_path, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error("cannot write " + out_path);
    store.export_public_csv(file);
    return kExitOk;
}

int cmd_serve(const std::string& config_path, int port_override, const std::string& snapshot_path,
              std::ostream& out, std::ostream& err) {
    auto config = config_path.empty() ? api::Config{} : api::load_config(config_path);
    api::apply_env_overrides(config);
    if (port_override >= 0) config.port = port_override;

    // Signals are taken synchronously by this thread; workers inherit the mask.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    Datastore store(config.data_dir);
    if (!snapshot_path.empty()) {
        const auto id = store.publish_scoreboards(read_snapshot_file(snapshot_path));
        out << "published snapshot " << id << std::endl;
    }
    api::Service service(store, config);
    api::HttpServer server(service);
    if (!server.bind(config.host, config.port)) {
        err << "cannot bind " << config.host << ":" << config.port << " (port in use?)\n";
        pthread_sigmask(SIG_UNBLOCK, &signals, nullptr);
        return kExitPortInUse;
    }
    out << "listening on http://" << config.host << ":" << server.port() << std::endl;
    std::thread worker([&] { server.run(); });
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
    worker.join();
    pthread_sigmask(SIG_UNBLOCK, &signals, nullptr);
    out << "stopped" << std::endl;
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Pairwise-comparison scoring: fit, analyze, import, export and serve."};
    app.name("pairscore");
    app.require_subcommand(1);

    FitFlags fit_flags;
    std::string fit_out;
    auto* fit = app.add_subcommand("fit", "Fit global and individual scores from a public CSV");
    fit->add_option("--input", fit_flags.input, "Public CSV file")->required()->check(CLI::ExistingFile);
    fit->add_option("--criterion", fit_flags.criterion, "Criterion id 1..10 or 'all'")->capture_default_str();
    fit->add_option("--out", fit_out, "Snapshot file to write")->required();
    add_fit_flags(*fit, fit_flags);

    FitFlags an_flags;
    bool top_decile = false;
    std::string an_out, an_snapshot;
    auto* analyze = app.add_subcommand("analyze", "Statistics report for a public CSV");
    analyze->add_option("--input", an_flags.input, "Public CSV file")->required()->check(CLI::ExistingFile);
    analyze->add_flag("--top-decile", top_decile, "Include correlations over the top decile");
    analyze->add_option("--out", an_out, "Report file (default: stdout)");
    analyze->add_option("--snapshot", an_snapshot, "Use scores from this snapshot instead of fitting")
        ->check(CLI::ExistingFile);
    add_fit_flags(*analyze, an_flags);

    std::string config_path, serve_snapshot;
    int port = -1;
    auto* serve = app.add_subcommand("serve", "Run the HTTP API");
    serve->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    serve->add_option("--port", port, "Override the configured port")->check(CLI::Range(0, 65535));
    serve->add_option("--snapshot", serve_snapshot, "Publish this snapshot before serving")
        ->check(CLI::ExistingFile);

    std::string im_dir, im_input;
    auto* import = app.add_subcommand("import", "Import a public CSV into a data directory");
    import->add_option("--data-dir", im_dir, "Data directory")->required();
    import->add_option("--input", im_input, "Public CSV file")->required()->check(CLI::ExistingFile);

    std::string ex_dir, ex_out;
    auto* exp = app.add_subcommand("export", "Export the public CSV from a data directory");
    exp->add_option("--data-dir", ex_dir, "Data directory")->required()->check(CLI::ExistingDirectory);
    exp->add_option("--out", ex_out, "Output file (default: stdout)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "pairscore: " << e.what() << "\n";
        for (auto* sub : app.get_subcommands()) {
            err << sub->help();
            return kExitUsage;
        }
        err << app.help();
        return kExitUsage;
    }

    try {
        if (fit->parsed()) return cmd_fit(fit_flags, fit_out, out, err);
        if (analyze->parsed()) return cmd_analyze(an_flags, an_snapshot, top_decile, an_out, out, err);
        if (serve->parsed()) return cmd_serve(config_path, port, serve_snapshot, out, err);
        if (import->parsed()) return cmd_import(im_dir, im_input, out, err);
        if (exp->parsed()) return cmd_export(ex_dir, ex_out, out);
    } catch (const ParseFailure& e) {
        err << "pairscore: " << e.what() << "\n";
        return kExitParse;
    } catch (const ValidationError& e) {
        err << "pairscore: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "pairscore: " << e.what() << "\n";
        return kExitParse;
    }
    return kExitUsage;
}

}  // namespace pairscore::cli
