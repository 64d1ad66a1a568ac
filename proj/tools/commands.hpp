#pragma once

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "flatlab/cover.hpp"
#include "flatlab/dynamics.hpp"
#include "flatlab/experiments.hpp"
#include "flatlab/report.hpp"

namespace flatlab::cli {

enum ExitCode { kPass = 0, kUsage = 1, kFail = 2, kCapExhausted = 3, kBadSurface = 4 };

/// A bad parameter value; `field` is the flag or file location at fault.
class ConfigValueError : public std::runtime_error {
public:
    ConfigValueError(const std::string& field, const std::string& what) : std::runtime_error(field + ": " + what), field(field) {}
    std::string field;
};

struct Common {
    std::string surface;
    std::string out;
    std::uint64_t seed{1};
    int jobs{1};
};

// ---- value parsing

inline QuadNum parse_number(const std::string& field, const std::string& text, std::int64_t ctx) {
    try {
        return parse_quadnum(text, ctx);
    } catch (const std::exception& e) {
        throw ConfigValueError(field, e.what());
    }
}

/// "c" or "c^1/m" (the m-th root of c).
inline Threshold parse_threshold(const std::string& field, const std::string& text, std::int64_t ctx) {
    auto hat = text.find('^');
    Threshold t;
    t.c = parse_number(field, text.substr(0, hat), ctx);
    t.m = 1;
    if (hat != std::string::npos) {
        std::string e = text.substr(hat + 1);
        if (e.rfind("1/", 0) != 0) throw ConfigValueError(field, "exponent must look like 1/m, got '" + e + "'");
        try {
            t.m = std::stoi(e.substr(2));
        } catch (const std::exception&) {
            throw ConfigValueError(field, "bad root index in '" + e + "'");
        }
        if (t.m < 1) throw ConfigValueError(field, "root index must be positive");
    }
    if (t.c.sign() <= 0) throw ConfigValueError(field, "threshold must be positive");
    return t;
}

inline std::pair<long, long> parse_class(const std::string& field, const std::string& text) {
    auto comma = text.find(',');
    if (comma == std::string::npos) throw ConfigValueError(field, "expected p,q, got '" + text + "'");
    try {
        std::size_t used = 0;
        long p = std::stol(text.substr(0, comma), &used);
        long q = std::stol(text.substr(comma + 1), &used);
        if (std::gcd(p, q) != 1) throw ConfigValueError(field, "class must be primitive");
        return {p, q};
    } catch (const std::invalid_argument&) {
        throw ConfigValueError(field, "expected integers p,q, got '" + text + "'");
    } catch (const std::out_of_range&) {
        throw ConfigValueError(field, "integer out of range in '" + text + "'");
    }
}

/// "poly:x,y"
inline SurfacePoint parse_point(const std::string& field, const std::string& text, const HalfTranslationSurface& s) {
    auto colon = text.find(':');
    auto comma = text.find(',');
    if (colon == std::string::npos || comma == std::string::npos || comma < colon)
        throw ConfigValueError(field, "expected poly:x,y, got '" + text + "'");
    int poly = 0;
    try {
        poly = std::stoi(text.substr(0, colon));
    } catch (const std::exception&) {
        throw ConfigValueError(field, "bad polygon index in '" + text + "'");
    }
    if (poly < 0 || poly >= s.polygon_count()) throw ConfigValueError(field, "polygon index out of range");
    return {poly, {parse_number(field, text.substr(colon + 1, comma - colon - 1), s.field()),
                   parse_number(field, text.substr(comma + 1), s.field())}};
}

inline Vec2 parse_vector(const std::string& field, const std::string& text, std::int64_t ctx) {
    auto comma = text.find(',');
    if (comma == std::string::npos) throw ConfigValueError(field, "expected x,y, got '" + text + "'");
    return {parse_number(field, text.substr(0, comma), ctx), parse_number(field, text.substr(comma + 1), ctx)};
}

inline Transversal transversal_or_default(const HalfTranslationSurface& s, const std::string& text) {
    return text.empty() ? horizontal_circle(s) : parse_transversal(s, text);
}

/// Schedule file: one entry per line, "B eps" with eps as for --eps; '#' starts a comment.
inline std::vector<ScheduleEntry> load_schedule(const std::string& path, std::int64_t ctx) {
    std::ifstream in(path);
    if (!in) throw ConfigValueError("--schedule", "cannot open '" + path + "'");
    std::vector<ScheduleEntry> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        auto words = detail::split_ws(line);
        if (words.empty()) continue;
        std::string where = path + ":" + std::to_string(lineno);
        if (words.size() != 2) throw ConfigValueError(where, "expected 'B eps'");
        ScheduleEntry e;
        e.B = parse_number(where + " (B)", words[0], ctx);
        e.eps = parse_threshold(where + " (eps)", words[1], ctx);
        e.label = words[1];
        out.push_back(e);
    }
    if (out.empty()) throw ConfigValueError("--schedule", "'" + path + "' has no entries");
    return out;
}

inline nlohmann::json point_json(const SurfacePoint& p) { return {{"poly", p.poly}, {"x", render(p.pos.x)}, {"y", render(p.pos.y)}}; }

inline nlohmann::json class_json(const std::vector<long>& h) { return h; }

inline std::string class_text(const std::vector<long>& h) {
    std::string s;
    for (std::size_t i = 0; i < h.size(); ++i) s += (i ? " " : "") + std::to_string(h[i]);
    return s;
}

inline Tagged lower(const QuadNum& x) { return tagged(x, Exactness::interval_lower); }
inline Tagged upper(const QuadNum& x) { return tagged(x, Exactness::interval_upper); }

// ---- validate

inline Report run_validate(const HalfTranslationSurface& s) {
    Report rep;
    rep.command = "validate";
    CsvTable cones({{"vertex", true}, {"angle_pi", true}, {"corners", true}, {"singular", false}, {"pi_point", false}});
    nlohmann::json table = nlohmann::json::array();
    for (const auto& v : s.all_vertices()) {
        cones.add_row({tagged(v.id), tagged(v.angle_multiple), tagged(v.orbit.size()), std::string(v.singular() ? "yes" : "no"),
                       std::string(v.angle_multiple == 1 ? "yes" : "no")});
        table.push_back({{"vertex", v.id}, {"angle_pi", v.angle_multiple}, {"corners", v.orbit.size()}});
    }
    rep.detail = std::move(cones);
    bool gb = s.gauss_bonnet_holds();
    rep.result["name"] = s.name();
    rep.result["field"] = s.field();
    rep.result["polygons"] = s.polygon_count();
    rep.result["translation_surface"] = s.is_translation_surface();
    rep.result["euler_characteristic"] = s.euler_characteristic();
    rep.result["genus"] = s.genus();
    rep.result["cone_points"] = table;
    rep.result["gauss_bonnet"] = {{"curvature_pi", s.curvature_in_pi()}, {"two_chi", 2 * s.euler_characteristic()}, {"holds", gb}};
    auto cover = build_resolving_cover(s);
    bool rh = cover.cover.euler_characteristic() ==
              cover.degree * s.euler_characteristic() - static_cast<int>(cover.branch_points.size()) * (cover.degree - 1);
    rep.result["resolving_cover"] = {{"degree", cover.degree},
                                     {"branch_points", cover.branch_points},
                                     {"euler_characteristic", cover.cover.euler_characteristic()},
                                     {"pi_points", cover.cover.pi_points().size()},
                                     {"riemann_hurwitz", rh}};
    rep.status = gb && rh && cover.cover.pi_points().empty() ? "PASS" : "FAIL";
    return rep;
}

// ---- flow

struct FlowArgs {
    std::string start;
    std::string direction{"0,1"};
    std::string cap{"10"};
};

inline Report run_flow(const HalfTranslationSurface& s, const Common& common, const FlowArgs& a) {
    Report rep;
    rep.command = "flow";
    SurfacePoint p;
    if (a.start.empty()) {
        auto rng = chunk_rng(common.seed, 0);
        p = random_point(s, rng);
    } else {
        p = parse_point("--start", a.start, s);
    }
    Vec2 dir = parse_vector("--direction", a.direction, s.field());
    QuadNum cap = parse_number("--cap", a.cap, s.field());
    if (cap.sign() <= 0) throw ConfigValueError("--cap", "must be positive");
    auto t = trace_straight(s, p, dir, cap);
    CsvTable segs({{"segment", true}, {"poly", true}, {"from_x", true}, {"from_y", true}, {"to_x", true}, {"to_y", true}});
    for (std::size_t i = 0; i < t.segments.size(); ++i) {
        const auto& g = t.segments[i];
        segs.add_row({tagged(i), tagged(g.poly), tagged(g.from.x), tagged(g.from.y), tagged(g.to.x), tagged(g.to.y)});
    }
    rep.detail = std::move(segs);
    const char* stop = t.stop == TraceStop::budget ? "budget" : (t.stop == TraceStop::cone_point ? "cone_point" : "transversal");
    rep.result["start"] = point_json(p);
    rep.result["stop"] = stop;
    rep.result["length_parameter"] = to_json(tagged(t.param));
    rep.result["end"] = point_json(t.end);
    if (t.vertex >= 0) rep.result["cone_point"] = t.vertex;
    rep.result["segments"] = t.segments.size();
    return rep;
}

// ---- iet

struct IetArgs {
    std::string transversal;
    std::string cap{"100"};
    long iterates{10000};
    std::string x0{"0"};
};

inline Report run_iet(const HalfTranslationSurface& s, const IetArgs& a) {
    Report rep;
    rep.command = "iet";
    auto t = transversal_or_default(s, a.transversal);
    QuadNum cap = parse_number("--cap", a.cap, s.field());
    auto iet = first_return_map(s, t, cap);
    CsvTable rows({{"interval", true}, {"lo", true}, {"hi", true}, {"translation", true}, {"return_length", true},
                   {"flipped", false}, {"image_rank", true}});
    for (std::size_t i = 0; i < iet.intervals.size(); ++i) {
        const auto& I = iet.intervals[i];
        rows.add_row({tagged(i), tagged(I.lo), tagged(I.hi), tagged(I.translation), tagged(I.return_length),
                      std::string(I.flipped ? "yes" : "no"), tagged(iet.permutation[i])});
    }
    rep.detail = std::move(rows);
    rep.result["transversal_length"] = to_json(tagged(t.length));
    rep.result["closed"] = t.closed;
    rep.result["intervals"] = iet.intervals.size();
    rep.result["permutation"] = iet.permutation;
    QuadNum vol{0};
    for (const auto& I : iet.intervals) vol += (I.hi - I.lo) * I.return_length;
    rep.result["swept_area"] = to_json(tagged(vol));
    rep.result["surface_area"] = to_json(tagged(s.area()));
    bool ok = true;
    if (a.iterates > 0) {
        QuadNum x0 = parse_number("--x0", a.x0, s.field());
        auto orb = rotation_orbit(iet, x0, a.iterates);
        rep.result["orbit"] = {{"length", orb.orbit_length},
                               {"rotation", orb.rotation},
                               {"rotation_number", to_json(tagged(orb.rotation_number))},
                               {"max_gap_values", orb.max_gap_values},
                               {"first_violation", orb.first_violation},
                               {"three_gap", orb.three_gap},
                               {"near_returns", orb.near_returns},
                               {"convergent_denominators", orb.denominators},
                               {"near_returns_are_convergents", orb.returns_match}};
        ok = orb.three_gap && (!orb.rotation || orb.returns_match);
    }
    rep.status = ok ? "PASS" : "FAIL";
    return rep;
}

// ---- return-time and target

struct ReturnArgs {
    std::string transversal;
    std::string cap{"100"};
    int trials{1000};
    std::string L;
};

inline Report run_return_time(const HalfTranslationSurface& s, const Common& common, const ReturnArgs& a) {
    Report rep;
    rep.command = "return-time";
    auto g = transversal_or_default(s, a.transversal);
    QuadNum cap = parse_number("--cap", a.cap, s.field());
    if (a.trials < 1) throw ConfigValueError("--trials", "must be at least 1");
    struct Hit {
        QuadNum at, length;
    };
    std::vector<std::vector<Hit>> chunks(chunk_count(a.trials));
    for_each_chunk(chunks.size(), common.jobs, [&](std::size_t c) {
        auto rng = chunk_rng(common.seed, c);
        std::uniform_int_distribution<long> u(0, (1L << 30) - 1);
        for (int i = 0; i < chunk_trials(a.trials, c); ++i) {
            QuadNum at = g.length * QuadNum(Rational(u(rng), 1L << 30));
            chunks[c].push_back({at, next_hit(s, g, at, cap).length});
        }
    });
    CsvTable rows({{"trial", true}, {"coordinate", true}, {"return_length", true}});
    QuadNum L{0};
    std::size_t trial = 0;
    for (const auto& ch : chunks)
        for (const auto& h : ch) {
            rows.add_row({tagged(trial++), tagged(h.at), tagged(h.length)});
            L = max(L, h.length);
        }
    rep.detail = std::move(rows);
    auto iet = first_return_map(s, g, cap);
    QuadNum exact{0};
    std::set<QuadNum> lengths;
    for (const auto& I : iet.intervals) {
        exact = max(exact, I.return_length);
        lengths.insert(I.return_length);
    }
    rep.result["trials"] = a.trials;
    rep.result["L"] = to_json(tagged(L, Exactness::empirical));
    rep.result["exact_max_return"] = to_json(tagged(exact));
    rep.result["distinct_return_lengths"] = lengths.size();
    rep.result["confirmed"] = L == exact;
    rep.status = L == exact ? "PASS" : "FAIL";
    return rep;
}

inline Report run_target(const HalfTranslationSurface& s, const Common& common, const ReturnArgs& a) {
    Report rep;
    rep.command = "target";
    auto g = transversal_or_default(s, a.transversal);
    QuadNum cap = parse_number("--cap", a.cap, s.field());
    if (a.trials < 1) throw ConfigValueError("--trials", "must be at least 1");
    QuadNum L;
    bool from_exchange = a.L.empty();
    if (from_exchange) {
        auto iet = first_return_map(s, g, cap);
        for (const auto& I : iet.intervals) L = max(L, I.return_length);
    } else {
        L = parse_number("--L", a.L, s.field());
    }
    std::vector<TargetReport> chunks(chunk_count(a.trials));
    for_each_chunk(chunks.size(), common.jobs, [&](std::size_t c) {
        auto rng = chunk_rng(common.seed, c);
        chunks[c] = target_check(s, g.pieces, L, chunk_trials(a.trials, c), rng, 4);
    });
    CsvTable rows({{"chunk", true}, {"trials", true}, {"hits", true}});
    int hits = 0;
    nlohmann::json misses = nlohmann::json::array();
    for (std::size_t c = 0; c < chunks.size(); ++c) {
        rows.add_row({tagged(c), tagged(chunks[c].trials), tagged(chunks[c].hits)});
        hits += chunks[c].hits;
        for (const auto& m : chunks[c].misses)
            if (misses.size() < 16) misses.push_back(point_json(m));
    }
    rep.detail = std::move(rows);
    double fraction = static_cast<double>(hits) / a.trials;
    rep.result["L"] = to_json(tagged(L));
    rep.result["L_source"] = from_exchange ? "exact maximal return length" : "--L";
    rep.result["trials"] = a.trials;
    rep.result["hits"] = hits;
    rep.result["fraction"] = to_json(tagged(fraction, Exactness::empirical));
    rep.result["misses"] = misses;
    rep.status = hits == a.trials ? "PASS" : "FAIL";
    return rep;
}

}  // namespace flatlab::cli
