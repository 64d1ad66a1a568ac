#pragma once

#include "commands.hpp"

namespace flatlab::cli {

// ---- bicorn

struct BicornArgs {
    std::string mode{"pair"};
    std::string alpha{"1,0"};
    std::string beta{"2,3"};
    int trials{200};
    long max_intersections{12};
    long brute_limit{6};
    std::string transversal;
    std::string cap{"100000"};
    std::string eps{"1/4"};
    std::string B{"2"};
};

inline Report run_bicorn_pair(const HalfTranslationSurface& s, const BicornArgs& a) {
    Report rep;
    auto [p1, q1] = parse_class("--alpha", a.alpha);
    auto [p2, q2] = parse_class("--beta", a.beta);
    auto alpha = lattice_loop(s, p1, q1, Rational(1, 3), Rational(1, 7));
    auto beta = lattice_loop(s, p2, q2, Rational(3, 5), Rational(2, 9));
    auto set = bicorns(s, alpha, beta);
    auto path = bicorn_path(s, alpha, beta);
    CsvTable rows({{"bicorn", true}, {"alpha_from", true}, {"alpha_to", true}, {"beta_forward", false}, {"interior", true},
                   {"homology", false}, {"nonseparating", false}, {"segments", true}});
    bool ok = true;
    for (std::size_t i = 0; i < set.bicorns.size(); ++i) {
        const auto& b = set.bicorns[i];
        bool simple = is_simple(b.curve).simple;
        ok = ok && simple && b.nonseparating;
        rows.add_row({tagged(i), tagged(b.a_from), tagged(b.a_to), std::string(b.b_forward ? "yes" : "no"), tagged(b.interior),
                      class_text(b.homology), std::string(b.nonseparating ? "yes" : "no"), tagged(b.curve.segments.size())});
    }
    rep.detail = std::move(rows);
    int farey = farey_distance(make_slope(p1, q1), make_slope(p2, q2));
    int len = static_cast<int>(path.curves.size()) - 1;
    bool decreasing = true;
    for (std::size_t i = 1; i < path.crossings.size(); ++i)
        if (path.crossings[i] >= path.crossings[i - 1]) decreasing = false;
    ok = ok && decreasing && farey <= len && len <= 4 * farey + 4;
    rep.result["alpha"] = {p1, q1};
    rep.result["beta"] = {p2, q2};
    rep.result["crossings"] = set.crossings.size();
    rep.result["bicorns"] = set.bicorns.size();
    rep.result["path_length"] = len;
    rep.result["path_crossings"] = path.crossings;
    rep.result["farey_distance"] = farey;
    rep.result["crossings_decrease"] = decreasing;
    rep.status = ok ? "PASS" : "FAIL";
    return rep;
}

inline Report run_bicorn_trials(const HalfTranslationSurface& s, const Common& common, const BicornArgs& a) {
    Report rep;
    if (a.trials < 1) throw ConfigValueError("--trials", "must be at least 1");
    if (a.max_intersections < 1) throw ConfigValueError("--max-intersections", "must be at least 1");
    std::vector<std::vector<std::vector<CsvTable::Cell>>> rows(chunk_count(a.trials));
    std::vector<int> bad(rows.size(), 0);
    std::vector<std::size_t> counts(rows.size(), 0);
    std::vector<QuadNum> worst(rows.size(), QuadNum(0));
    std::vector<CsvTable::Column> cols;
    Transversal t;
    Threshold eps;
    QuadNum B, cap;
    if (a.mode == "fuzz") {
        cols = {{"trial", true}, {"alpha", false}, {"beta", false}, {"crossings", true}, {"bicorns", true},
                {"simple", false}, {"nonseparating", false}, {"matches_brute_force", false}};
    } else if (a.mode == "path") {
        cols = {{"trial", true}, {"alpha", false}, {"beta", false}, {"farey_distance", true}, {"path_length", true},
                {"crossings", false}, {"ok", false}};
    } else {
        t = transversal_or_default(s, a.transversal);
        eps = parse_threshold("--eps", a.eps, s.field());
        B = parse_number("--B", a.B, s.field());
        cap = parse_number("--cap", a.cap, s.field());
        cols = {{"trial", true}, {"alpha", false}, {"beta", false}, {"alpha_width", true}, {"beta_width", true},
                {"bicorns", true}, {"worst_bicorn_width", true}, {"ok", false}};
    }
    for_each_chunk(rows.size(), common.jobs, [&](std::size_t c) {
        auto rng = chunk_rng(common.seed, c);
        for (int i = 0; i < chunk_trials(a.trials, c); ++i) {
            auto id = tagged(c * kChunk + static_cast<std::size_t>(i));
            auto yn = [](bool b) { return std::string(b ? "yes" : "no"); };
            if (a.mode == "fuzz") {
                auto tr = bicorn_fuzz_trial(s, rng, a.max_intersections, a.brute_limit);
                if (!tr.ok()) ++bad[c];
                counts[c] += tr.bicorns;
                std::string brute = tr.matches_brute_force ? yn(*tr.matches_brute_force) : "skipped";
                rows[c].push_back({id, class_text({tr.slopes.p1, tr.slopes.q1}), class_text({tr.slopes.p2, tr.slopes.q2}),
                                   tagged(tr.crossings), tagged(tr.bicorns), yn(tr.simple), yn(tr.essential), brute});
            } else if (a.mode == "path") {
                auto tr = bicorn_path_trial(s, rng, a.max_intersections);
                if (!tr.ok()) ++bad[c];
                std::string xs;
                for (std::size_t k = 0; k < tr.crossings.size(); ++k) xs += (k ? " " : "") + std::to_string(tr.crossings[k]);
                rows[c].push_back({id, class_text({tr.slopes.p1, tr.slopes.q1}), class_text({tr.slopes.p2, tr.slopes.q2}),
                                   tagged(tr.farey), tagged(tr.length), xs, yn(tr.ok())});
            } else {
                auto tr = bicorn_closure_trial(s, t, eps, B, cap, rng);
                if (!tr.ok) ++bad[c];
                counts[c] += tr.bicorns;
                worst[c] = max(worst[c], tr.worst_bicorn_width);
                rows[c].push_back({id, class_text(tr.alpha_class), class_text(tr.beta_class), tagged(tr.alpha_width),
                                   tagged(tr.beta_width), tagged(tr.bicorns), tagged(tr.worst_bicorn_width), yn(tr.ok)});
            }
        }
    });
    CsvTable table(cols);
    int failures = 0;
    std::size_t total = 0;
    QuadNum w{0};
    for (std::size_t c = 0; c < rows.size(); ++c) {
        for (auto& r : rows[c]) table.add_row(std::move(r));
        failures += bad[c];
        total += counts[c];
        w = max(w, worst[c]);
    }
    rep.detail = std::move(table);
    rep.result["mode"] = a.mode;
    rep.result["trials"] = a.trials;
    rep.result["failures"] = failures;
    if (a.mode != "path") rep.result["bicorns"] = total;
    if (a.mode == "closure") {
        rep.result["eps"] = {{"c", render(eps.c)}, {"root", eps.m}, {"approx", eps.approx()}};
        rep.result["B"] = to_json(tagged(B));
        rep.result["worst_bicorn_width"] = to_json(tagged(w));
        rep.result["doubled_eps_approx"] = eps.doubled().approx();
    }
    rep.status = failures == 0 ? "PASS" : "FAIL";
    return rep;
}

inline Report run_bicorn(const HalfTranslationSurface& s, const Common& common, const BicornArgs& a) {
    if (a.mode != "pair" && a.mode != "fuzz" && a.mode != "path" && a.mode != "closure")
        throw ConfigValueError("--mode", "expected pair, fuzz, path or closure, got '" + a.mode + "'");
    Report rep = a.mode == "pair" ? run_bicorn_pair(s, a) : run_bicorn_trials(s, common, a);
    rep.command = "bicorn";
    return rep;
}

// ---- converge

struct ConvergeArgs {
    std::string sequence{"golden"};
    int iterates{20};
    int first{3};
    std::string schedule;
    std::string transversal;
    std::string start{"1/3"};
    std::string cap{"100000000"};
    std::string base{"1,0"};
};

inline Report run_converge(const HalfTranslationSurface& s, const ConvergeArgs& a) {
    Report rep;
    rep.command = "converge";
    if (a.first < 1 || a.iterates < a.first) throw ConfigValueError("--iterates", "need 1 <= --first <= --iterates");
    auto [bp, bq] = parse_class("--base", a.base);
    auto base = lattice_loop(s, bp, bq, Rational(3, 5), Rational(1, 3));
    auto schedule = a.schedule.empty() ? power_schedule(a.iterates) : load_schedule(a.schedule, s.field());
    std::vector<PLCurve> seq;
    if (a.sequence == "golden" || a.sequence == "alternating") {
        auto t = transversal_or_default(s, a.transversal);
        QuadNum c0 = parse_number("--start", a.start, s.field());
        seq = fibonacci_closings(s, t, c0, a.first, a.iterates, parse_number("--cap", a.cap, s.field()));
        if (a.sequence == "alternating") {
            // every other closing replaced by a horizontal loop
            auto fixed = lattice_loop(s, 1, 0, Rational(1, 3), Rational(1, 7));
            for (std::size_t i = 1; i < seq.size(); i += 2) seq[i] = fixed;
        }
    } else if (a.sequence == "constant") {
        for (int k = a.first; k <= a.iterates; ++k) seq.push_back(lattice_loop(s, 1, 0, Rational(1, 3), Rational(1, 7)));
    } else {
        throw ConfigValueError("--sequence", "expected golden, constant or alternating, got '" + a.sequence + "'");
    }
    auto cert = convergence_certificate(s, seq, schedule, base);
    CsvTable rows({{"index", true}, {"homology", false}, {"size_lower", true}, {"size_upper", true}, {"width", true},
                   {"distance_lower", true}, {"distance_upper", true}, {"windows_passing", true}});
    for (std::size_t i = 0; i < cert.records.size(); ++i) {
        const auto& r = cert.records[i];
        long passing = std::count_if(r.windows.begin(), r.windows.end(), [](const WindowReport& w) { return w.pass; });
        rows.add_row({tagged(static_cast<long>(i) + a.first), class_text(r.homology), lower(r.size.size_lower),
                      upper(r.size.size_upper), tagged(r.size.width), tagged(static_cast<long>(r.distance.lower), Exactness::interval_lower),
                      tagged(static_cast<long>(r.distance.upper), Exactness::interval_upper), tagged(passing)});
    }
    rep.detail = std::move(rows);
    nlohmann::json stable = nlohmann::json::array();
    for (std::size_t e = 0; e < schedule.size(); ++e) {
        nlohmann::json n = nullptr;
        if (cert.stable_from[e]) n = static_cast<long>(*cert.stable_from[e]) + a.first;
        stable.push_back({{"eps", schedule[e].label}, {"B", render(schedule[e].B)}, {"stable_from", n}});
    }
    rep.result["sequence"] = a.sequence;
    rep.result["indices"] = {a.first, a.iterates};
    rep.result["schedule"] = stable;
    rep.result["stabilized"] = cert.stabilized;
    rep.result["size_diverges"] = cert.size_diverges;
    rep.result["distance_diverges"] = cert.distance_diverges;
    rep.result["failures"] = cert.failures;
    if (cert.witness) {
        const auto& w = *cert.witness;
        rep.result["witness"] = {{"index", static_cast<long>(w.index) + a.first},
                                 {"eps", schedule[w.entry].label},
                                 {"B", render(schedule[w.entry].B)},
                                 {"window", {{"from", w.window.from}, {"to", w.window.to}, {"width", to_json(tagged(w.window.width))}}}};
    }
    bool ok = cert.pass;
    if (a.sequence == "golden") {
        // classes should be consecutive Fibonacci pairs, i.e. convergents of the slope
        bool conv = true;
        for (std::size_t i = 1; i < cert.records.size(); ++i) {
            const auto& x = cert.records[i - 1].homology;
            const auto& y = cert.records[i].homology;
            if (x.size() != 2 || y.size() != 2 || std::labs(x[0] * y[1] - x[1] * y[0]) != 1) conv = false;
        }
        rep.result["classes_are_convergents"] = conv;
        ok = ok && conv;
    }
    rep.status = ok ? "PASS" : "FAIL";
    return rep;
}

// ---- axis

struct AxisArgs {
    std::string map{"cat"};
    int iterates{12};
    std::string base{"1,0"};
};

inline Report run_axis(const HalfTranslationSurface& s, const AxisArgs& a) {
    Report rep;
    rep.command = "axis";
    if (a.iterates < 1) throw ConfigValueError("--iterates", "must be at least 1");
    std::vector<AffineAuto> autos;
    try {
        autos = declared_autos(s);
    } catch (const DynamicsError& e) {
        throw ConfigValueError(s.name() + " automorphisms", e.what());
    }
    AffineAuto f;
    if (a.map == "identity") {
        f = identity_auto(s);
    } else if (const auto* g = find_auto(autos, a.map)) {
        f = *g;
    } else {
        std::string names = "identity";
        for (const auto& g : autos) names += ", " + g.name;
        throw ConfigValueError("--map", "unknown map '" + a.map + "'; available: " + names);
    }
    auto [p, q] = parse_class("--base", a.base);
    auto c0 = lattice_loop(s, p, q, Rational(1, 3), Rational(1, 7));
    auto orb = axis_experiment(s, f, c0, a.iterates);
    CsvTable rows({{"iterate", true}, {"homology", false}, {"distance_lower", true}, {"distance_upper", true},
                   {"size_lower", true}, {"size_upper", true}, {"width", true}});
    for (std::size_t i = 0; i < orb.records.size(); ++i) {
        const auto& r = orb.records[i];
        rows.add_row({tagged(i), class_text(r.homology), tagged(static_cast<long>(r.distance.lower), Exactness::interval_lower),
                      tagged(static_cast<long>(r.distance.upper), Exactness::interval_upper), lower(r.size.size_lower),
                      upper(r.size.size_upper), tagged(r.size.width)});
    }
    rep.detail = std::move(rows);
    bool hyperbolic = std::labs(f.trace()) > 2;
    rep.result["map"] = f.name;
    rep.result["lattice_action"] = f.lattice;
    rep.result["trace"] = f.trace();
    rep.result["hyperbolic"] = hyperbolic;
    if (f.lambda) rep.result["lambda"] = to_json(tagged(*f.lambda));
    rep.result["slope"] = to_json(tagged(orb.slope, Exactness::empirical));
    rep.result["intercept"] = to_json(tagged(orb.intercept, Exactness::empirical));
    rep.result["monotone"] = orb.monotone;
    if (orb.width_scales_exactly) rep.result["width_scales_exactly"] = *orb.width_scales_exactly;
    bool ok = hyperbolic ? orb.monotone && orb.slope >= 0.5 && orb.width_scales_exactly.value_or(false) : orb.slope < 0.5;
    rep.result["expected"] = hyperbolic ? "linear growth" : "bounded";
    rep.status = ok ? "PASS" : "FAIL";
    return rep;
}

}  // namespace flatlab::cli
