// flatlab: experiment runner for half-translation surfaces.

#include <filesystem>

#include "graph_commands.hpp"

using namespace flatlab;
using namespace flatlab::cli;

namespace {

int exit_for(const std::string& status) {
    if (status == "PASS") return kPass;
    if (status == "CAP_EXHAUSTED") return kCapExhausted;
    return kFail;
}

void print_summary(const Report& rep, const std::string& out) {
    std::cout << rep.command << ": " << rep.status;
    if (rep.result.contains("name")) std::cout << " (" << rep.result["name"].get<std::string>() << ")";
    std::cout << '\n';
    if (rep.command == "validate") {
        for (const auto& v : rep.result["cone_points"])
            std::cout << "  vertex " << v["vertex"] << "  angle " << v["angle_pi"] << "pi  corners " << v["corners"] << '\n';
        const auto& gb = rep.result["gauss_bonnet"];
        std::cout << "  Gauss-Bonnet: sum(2-k) = " << gb["curvature_pi"] << ", 2chi = " << gb["two_chi"]
                  << (gb["holds"].get<bool>() ? "  ok" : "  MISMATCH") << '\n';
    }
    if (rep.result.contains("failures") && rep.result["failures"].is_array())
        for (const auto& f : rep.result["failures"]) std::cout << "  " << f.get<std::string>() << '\n';
    if (!out.empty()) {
        std::cout << "  wrote " << out << "/" << rep.command << ".json";
        if (rep.detail) std::cout << ", " << out << "/" << rep.command << ".csv";
        std::cout << '\n';
    }
}

Report error_report(const std::string& command, const std::string& status, const std::string& what) {
    Report rep;
    rep.command = command;
    rep.status = status;
    rep.result["error"] = what;
    return rep;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Experiments on flat surfaces with exact arithmetic"};
    app.set_config("--config", "", "TOML/INI file with the same keys as the flags; flags win");
    app.require_subcommand(1);
    app.fallthrough();
    app.option_defaults()->always_capture_default();

    Common common;
    app.add_option("--surface", common.surface, "surface file")->check(CLI::ExistingFile);
    app.add_option("--out", common.out, "directory for <command>.json and <command>.csv");
    app.add_option("--seed", common.seed, "seed for all sampling");
    app.add_option("--jobs", common.jobs, "worker threads")->check(CLI::PositiveNumber);

    app.add_subcommand("validate", "cone points, Gauss-Bonnet and the resolving cover");

    FlowArgs flow_args;
    auto* flow = app.add_subcommand("flow", "trace one straight geodesic");
    flow->add_option("--start", flow_args.start, "poly:x,y; random when omitted");
    flow->add_option("--direction", flow_args.direction, "x,y");
    flow->add_option("--cap", flow_args.cap, "length budget in units of the direction vector");

    IetArgs iet_args;
    auto* iet = app.add_subcommand("iet", "first-return map of the vertical flow");
    iet->add_option("--transversal", iet_args.transversal, "poly:x,y:length; default is the horizontal circle");
    iet->add_option("--cap", iet_args.cap, "return length cap");
    iet->add_option("--iterates", iet_args.iterates, "orbit length for the gap statistics (0 skips)");
    iet->add_option("--x0", iet_args.x0, "orbit start coordinate");

    ReturnArgs ret_args;
    auto* ret = app.add_subcommand("return-time", "empirical maximal return length");
    ret->add_option("--transversal", ret_args.transversal, "poly:x,y:length");
    ret->add_option("--cap", ret_args.cap, "return length cap");
    ret->add_option("--trials", ret_args.trials, "sampled starts");

    ReturnArgs tgt_args;
    auto* tgt = app.add_subcommand("target", "vertical geodesics of length L hit the transversal");
    tgt->add_option("--transversal", tgt_args.transversal, "poly:x,y:length");
    tgt->add_option("--cap", tgt_args.cap, "return length cap");
    tgt->add_option("--trials", tgt_args.trials, "sampled starts");
    tgt->add_option("--L", tgt_args.L, "flow length; default is the exact maximal return length");

    BicornArgs bic_args;
    auto* bic = app.add_subcommand("bicorn", "bicorn surgery between curves");
    bic->add_option("--mode", bic_args.mode, "pair | fuzz | path | closure");
    bic->add_option("--alpha", bic_args.alpha, "p,q (pair mode)");
    bic->add_option("--beta", bic_args.beta, "p,q (pair mode)");
    bic->add_option("--trials", bic_args.trials, "random trials");
    bic->add_option("--max-intersections", bic_args.max_intersections, "largest |det| of sampled pairs");
    bic->add_option("--brute-limit", bic_args.brute_limit, "compare with enumeration up to this many crossings");
    bic->add_option("--transversal", bic_args.transversal, "poly:x,y:length (closure mode)");
    bic->add_option("--cap", bic_args.cap, "flow length cap (closure mode)");
    bic->add_option("--eps", bic_args.eps, "width threshold, c or c^1/m (closure mode)");
    bic->add_option("--B", bic_args.B, "window size (closure mode)");

    ConvergeArgs conv_args;
    auto* conv = app.add_subcommand("converge", "convergence certificate for a curve sequence");
    conv->add_option("--sequence", conv_args.sequence, "golden | constant | alternating");
    conv->add_option("--iterates", conv_args.iterates, "last index");
    conv->add_option("--first", conv_args.first, "first index");
    conv->add_option("--schedule", conv_args.schedule, "file of 'B eps' lines; default eps_k = 2^(-k/4), B_k = k");
    conv->add_option("--transversal", conv_args.transversal, "poly:x,y:length");
    conv->add_option("--start", conv_args.start, "leaf start coordinate on the transversal");
    conv->add_option("--cap", conv_args.cap, "flow length cap");
    conv->add_option("--base", conv_args.base, "p,q of the base curve");

    AxisArgs axis_args;
    auto* axis = app.add_subcommand("axis", "orbit of a curve under an affine automorphism");
    axis->add_option("--map", axis_args.map, "declared automorphism name or identity");
    axis->add_option("--iterates", axis_args.iterates, "orbit length");
    axis->add_option("--base", axis_args.base, "p,q of the starting curve");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kPass : kUsage;
    }

    auto* sub = app.get_subcommands().front();
    std::string command = sub->get_name();
    if (common.surface.empty()) {
        std::cerr << "error: --surface is required\n";
        return kUsage;
    }
    if (!common.out.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(common.out, ec);
        if (ec) {
            std::cerr << "error: --out: cannot create '" << common.out << "': " << ec.message() << '\n';
            return kUsage;
        }
    }

    nlohmann::json config;
    config["surface"] = common.surface;
    config["seed"] = common.seed;
    for (const auto* opt : sub->get_options()) {
        if (opt->get_name() == "--help" || opt->get_name().empty()) continue;
        auto vals = opt->results();
        config[opt->get_name(false, true).substr(2)] = vals.empty() ? opt->get_default_str() : vals.back();
    }

    Report rep;
    int code = kPass;
    try {
        auto s = load_surface(common.surface);
        if (command == "validate") rep = run_validate(s);
        else if (command == "flow") rep = run_flow(s, common, flow_args);
        else if (command == "iet") rep = run_iet(s, iet_args);
        else if (command == "return-time") rep = run_return_time(s, common, ret_args);
        else if (command == "target") rep = run_target(s, common, tgt_args);
        else if (command == "bicorn") rep = run_bicorn(s, common, bic_args);
        else if (command == "converge") rep = run_converge(s, conv_args);
        else rep = run_axis(s, axis_args);
        code = exit_for(rep.status);
    } catch (const SurfaceError& e) {
        std::cerr << "error: " << common.surface << ": " << e.what() << '\n';
        return kBadSurface;
    } catch (const ConfigValueError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const CapExhausted& e) {
        rep = error_report(command, "CAP_EXHAUSTED", e.what());
        code = kCapExhausted;
    } catch (const CorridorTooSmall& e) {
        rep = error_report(command, "CAP_EXHAUSTED", e.what());
        code = kCapExhausted;
    } catch (const ExperimentError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        rep = error_report(command, "ERROR", e.what());
        code = kFail;
    }
    rep.config = config;
    if (!common.out.empty()) rep.write(common.out);
    print_summary(rep, common.out);
    if (rep.result.contains("error")) std::cerr << "error: " << rep.result["error"].get<std::string>() << '\n';
    return code;
}
