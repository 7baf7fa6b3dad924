#include "nsfd/cli.hpp"

#include <CLI11.hpp>

#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "nsfd/diagnostics.hpp"
#include "nsfd/errors.hpp"
#include "nsfd/integrators.hpp"
#include "nsfd/report.hpp"
#include "nsfd/systems.hpp"

namespace nsfd::cli {

namespace {

namespace fs = std::filesystem;

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Shortest decimal text that reads back to the same double.
std::string shortest(double v) {
    for (int precision = 1; precision <= 17; ++precision) {
        std::ostringstream os;
        os.precision(precision);
        os << v;
        if (std::stod(os.str()) == v) return os.str();
    }
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string file_token(const std::string& text) {
    std::string token;
    for (char ch : text) {
        const bool keep = std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-';
        token.push_back(keep ? ch : '_');
    }
    return token;
}

struct Common {
    std::string model;
    std::string out_dir = ".";
    std::string box_text;
    std::string weight_text = "identity";
};

struct Options {
    Common common;
    std::vector<std::string> schemes;
    std::vector<double> steps;
    double x0 = 0.0;
    double y0 = 0.0;
    double t_end = 0.0;
};

Box parse_box(const std::string& text) {
    if (text.empty()) return Box{};
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw UsageError("--box expects X,Y");
    try {
        std::size_t used_x = 0, used_y = 0;
        const std::string xs = text.substr(0, comma), ys = text.substr(comma + 1);
        const double x = std::stod(xs, &used_x);
        const double y = std::stod(ys, &used_y);
        if (used_x != xs.size() || used_y != ys.size() || !(x > 0.0) || !(y > 0.0) ||
            !std::isfinite(x) || !std::isfinite(y)) {
            throw UsageError("--box extents must be positive numbers");
        }
        return Box{x, y};
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception&) {
        throw UsageError("--box expects X,Y");
    }
}

void require_positive(const std::vector<double>& values, const char* flag) {
    for (double v : values) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw UsageError(std::string(flag) + " values must be positive and finite");
        }
    }
}

void require_state(const Options& o) {
    if (!(o.x0 >= 0.0) || !(o.y0 >= 0.0) || !std::isfinite(o.x0) || !std::isfinite(o.y0)) {
        throw UsageError("--x0 and --y0 must be non-negative and finite");
    }
    if (!(o.t_end > 0.0) || !std::isfinite(o.t_end)) {
        throw UsageError("--t-end must be positive and finite");
    }
}

SchemeId scheme_from(const std::string& name, const Common& c) {
    try {
        return parse_scheme(name, StepWeight::parse(c.weight_text));
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

SplitSystem model_from(const Common& c) {
    try {
        return model_from_name(c.model);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

fs::path prepare_dir(const Common& c) {
    fs::path dir(c.out_dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open " + path.string() + " for writing");
    file << content;
    if (!file) throw std::runtime_error("failed writing " + path.string());
}

int cmd_simulate(const Options& o, std::ostream& out) {
    require_state(o);
    require_positive(o.steps, "--h");
    const SchemeId scheme = scheme_from(o.schemes.front(), o.common);
    const SplitSystem sys = model_from(o.common);
    const double h = o.steps.front();

    const Trajectory traj = integrate(sys, scheme, State{o.x0, o.y0, 0.0}, h, o.t_end);
    std::ostringstream csv;
    write_trajectory_csv(csv, traj);
    const fs::path path = prepare_dir(o.common) /
                          (file_token(o.common.model) + "_" + file_token(scheme_label(scheme)) +
                           "_h" + shortest(h) + ".csv");
    write_file(path, csv.str());

    const State& last = traj.states.back();
    const auto audit = audit_positivity(traj);
    out.precision(17);
    out << "wrote " << path.string() << " rows=" << traj.states.size() << " final=(" << last.x
        << ", " << last.y << ") positivity="
        << (audit.first_violation ? "violated@" + std::to_string(audit.first_violation->step)
                                  : std::string("ok"));
    if (traj.halt_reason) out << " halted: " << *traj.halt_reason;
    out << '\n';
    return kExitOk;
}

int cmd_equilibria(const Options& o, bool out_given, std::ostream& out) {
    require_positive(o.steps, "--h");
    const Box box = parse_box(o.common.box_text);
    const SplitSystem sys = model_from(o.common);
    const std::string text = equilibria_report(sys, box, o.steps).dump(2) + "\n";
    out << text;
    if (out_given) {
        write_file(prepare_dir(o.common) / (file_token(o.common.model) + "_equilibria.json"), text);
    }
    return kExitOk;
}

int cmd_compare(const Options& o, std::ostream& out) {
    require_state(o);
    require_positive(o.steps, "--h");
    const SplitSystem sys = model_from(o.common);
    std::vector<Scenario> scenarios;
    for (const auto& name : o.schemes) {
        const SchemeId scheme = scheme_from(name, o.common);
        for (double h : o.steps) scenarios.push_back({scheme, h, State{o.x0, o.y0, 0.0}, o.t_end});
    }
    const auto runs = compare_schemes(sys, scenarios);
    std::ostringstream csv;
    write_comparison_csv(csv, runs);
    const fs::path path = prepare_dir(o.common) / (file_token(o.common.model) + "_compare.csv");
    write_file(path, csv.str());
    out << "wrote " << path.string() << " runs=" << runs.size() << '\n';
    return kExitOk;
}

int cmd_convergence(const Options& o, std::ostream& out) {
    require_state(o);
    require_positive(o.steps, "--steps");
    const SchemeId scheme = scheme_from(o.schemes.front(), o.common);
    const SplitSystem sys = model_from(o.common);
    const OrderEstimate est = estimate_order(sys, scheme, State{o.x0, o.y0, 0.0}, o.t_end, o.steps);

    std::ostringstream csv;
    csv.precision(17);
    csv << "h,sup_error\n";
    for (std::size_t i = 0; i < est.steps.size(); ++i) {
        csv << est.steps[i] << ',' << est.errors[i] << '\n';
    }
    const fs::path path = prepare_dir(o.common) / (file_token(o.common.model) + "_" +
                                                   file_token(scheme_label(scheme)) +
                                                   "_convergence.csv");
    write_file(path, csv.str());
    out << to_json(est).dump(2) << '\n';
    return kExitOk;
}

int cmd_ghosts(const Options& o, bool out_given, std::ostream& out) {
    require_positive(o.steps, "--h");
    const Box box = parse_box(o.common.box_text);
    const SchemeId scheme = scheme_from(o.schemes.front(), o.common);
    const SplitSystem sys = model_from(o.common);
    const double h = o.steps.front();
    const std::string text = to_json(detect_ghosts(sys, scheme, h, box)).dump(2) + "\n";
    out << text;
    if (out_given) {
        write_file(prepare_dir(o.common) / (file_token(o.common.model) + "_" +
                                            file_token(scheme_label(scheme)) + "_h" +
                                            shortest(h) + "_ghosts.json"),
                   text);
    }
    return kExitOk;
}

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--model", c.model, "model1, model2 or rma:a,b,c,d")->required();
    sub->add_option("--out", c.out_dir, "output directory");
    sub->add_option("--weight", c.weight_text, "ENSFD step weight: identity or exp:LAMBDA");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Non-standard finite difference integrators for split planar systems", "nsfd_cli"};
    app.require_subcommand(1);
    // -h would clash with the step-size flag.
    app.set_help_flag("--help", "print this help message and exit");

    // One Options object per subcommand avoids CLI11 sharing bound variables.
    Options sim, eq, cmp, conv, gh;

    auto* simulate = app.add_subcommand("simulate", "integrate one trajectory and write CSV");
    add_common(simulate, sim.common);
    sim.schemes.assign(1, "");
    simulate->add_option("--scheme", sim.schemes.front(), "nsfd|ensfd|euler|rk2|rk4")->required();
    sim.steps.assign(1, 0.0);
    simulate->add_option("--h", sim.steps.front(), "step size")->required();
    simulate->add_option("--x0", sim.x0)->required();
    simulate->add_option("--y0", sim.y0)->required();
    simulate->add_option("--t-end", sim.t_end)->required();

    auto* equilibria = app.add_subcommand("equilibria", "stability report of every equilibrium");
    add_common(equilibria, eq.common);
    equilibria->add_option("--h", eq.steps, "step sizes for discrete verdicts")->delimiter(',');
    equilibria->add_option("--box", eq.common.box_text, "search box X,Y");

    auto* compare = app.add_subcommand("compare", "run schemes x step sizes and write a table");
    add_common(compare, cmp.common);
    cmp.schemes = {"nsfd", "euler", "rk2", "rk4"};
    compare->add_option("--scheme", cmp.schemes, "comma-separated schemes")->delimiter(',');
    compare->add_option("--h", cmp.steps, "comma-separated step sizes")->delimiter(',')->required();
    compare->add_option("--x0", cmp.x0)->required();
    compare->add_option("--y0", cmp.y0)->required();
    compare->add_option("--t-end", cmp.t_end)->required();

    auto* convergence = app.add_subcommand("convergence", "estimate the observed order");
    add_common(convergence, conv.common);
    conv.schemes.assign(1, "nsfd");
    convergence->add_option("--scheme", conv.schemes.front(), "scheme");
    convergence->add_option("--steps", conv.steps, "descending step sizes")
        ->delimiter(',')
        ->required();
    convergence->add_option("--x0", conv.x0)->required();
    convergence->add_option("--y0", conv.y0)->required();
    convergence->add_option("--t-end", conv.t_end)->required();

    auto* ghosts = app.add_subcommand("ghosts", "locate fixed points of one step map");
    add_common(ghosts, gh.common);
    gh.schemes.assign(1, "");
    ghosts->add_option("--scheme", gh.schemes.front(), "scheme")->required();
    gh.steps.assign(1, 0.0);
    ghosts->add_option("--h", gh.steps.front(), "step size")->required();
    ghosts->add_option("--box", gh.common.box_text, "search box X,Y");

    std::vector<std::string> argv_storage;
    argv_storage.reserve(args.size() + 1);
    argv_storage.push_back("nsfd_cli");
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_storage) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return kExitUsage;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim, out);
        if (equilibria->parsed()) return cmd_equilibria(eq, equilibria->count("--out") > 0, out);
        if (compare->parsed()) return cmd_compare(cmp, out);
        if (convergence->parsed()) return cmd_convergence(conv, out);
        if (ghosts->parsed()) return cmd_ghosts(gh, ghosts->count("--out") > 0, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace nsfd::cli
