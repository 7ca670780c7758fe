// Command-line front end: spectra, stability constants, lambda1 sweeps,
// deficit probes, Hardy checks and the verification suite.
//
// Exit codes: 0 success, 1 numerical failure, 2 bad usage, 3 verification
// suite failure.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "conestab/acceptance.hpp"
#include "conestab/angular_spectrum.hpp"
#include "conestab/functionals.hpp"
#include "conestab/geometry.hpp"
#include "conestab/radial_ode.hpp"
#include "conestab/spectrum.hpp"
#include "conestab/version.hpp"

using nlohmann::json;
using namespace conestab;

namespace {

struct CommonOpts {
    int dim = 3;
    double theta0 = -1.0;
    double lambda1 = -1.0;
    double measure = -1.0;  // |D| for abstract cones; default: hemisphere
    std::size_t grid_size = 256;
    std::string format = "json";
    std::uint64_t seed = 0;
};

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

struct ResolvedCone {
    ConeDomain cone;
    double lambda1;
    std::optional<AngularEigen> mode;  // cap lambda1 eigenfunction
};

ResolvedCone resolve_cone(const CommonOpts& o, bool need_mode) {
    if (o.theta0 > 0.0) {
        ConeDomain cone = make_cap_cone(o.dim, o.theta0);
        if (need_mode) {
            AngularEigen mode = lambda1_eigen(cone);
            const double l1 = mode.lambda;
            return {cone, l1, std::move(mode)};
        }
        return {cone, lambda1(cone), std::nullopt};
    }
    const double measure =
        o.measure > 0.0 ? o.measure : 0.5 * sphere_measure(o.dim - 1);
    ConeDomain cone = make_abstract_cone(o.dim, o.lambda1, measure);
    return {cone, o.lambda1, std::nullopt};
}

json config_json(const CommonOpts& o, const std::string& command) {
    json j;
    j["command"] = command;
    j["dim"] = o.dim;
    if (o.theta0 > 0.0) j["theta0"] = o.theta0;
    if (o.lambda1 > 0.0) j["lambda1"] = o.lambda1;
    if (o.measure > 0.0) j["measure"] = o.measure;
    j["grid_size"] = o.grid_size;
    j["seed"] = o.seed;
    j["format"] = o.format;
    return j;
}

void emit_json(const json& j) { std::cout << j.dump(2) << "\n"; }

const char* branch_name(ConstantBranch b, double lambda1, int dim) {
    if (std::abs(lambda1 - 2.0 * dim) <=
        8.0 * std::numeric_limits<double>::epsilon() * 2.0 * dim)
        return "boundary";
    return b == ConstantBranch::radial_branch ? "radial" : "lambda1";
}

struct SweepRow {
    double lambda1 = 0.0;
    double mu1 = 0.0, mu2 = 0.0, mu3 = 0.0;
    double c_star = 0.0;
    std::string branch;
};

SweepRow sweep_row(int dim, double l1, double S) {
    SweepRow row;
    row.lambda1 = l1;
    row.mu1 = mu_radial(dim, 1, S);
    const GapCheck gap = nondegeneracy_check(dim, l1, S);
    row.mu2 = gap.mu2;
    row.mu3 = gap.mu3;
    const LocalConstant lc = local_constant(dim, l1);
    row.c_star = lc.c_star;
    row.branch = lc.degenerate ? "degenerate" : branch_name(lc.branch, l1, dim);
    return row;
}

void emit_table_csv(int dim, const std::vector<SweepRow>& rows) {
    std::printf("N,lambda1,mu1,mu2,mu3,c_star,branch\n");
    for (const auto& r : rows) {
        std::printf("%d,%s,%s,%s,%s,%s,%s\n", dim, fmt(r.lambda1).c_str(),
                    fmt(r.mu1).c_str(), fmt(r.mu2).c_str(), fmt(r.mu3).c_str(),
                    fmt(r.c_star).c_str(), r.branch.c_str());
    }
}

json rows_json(const std::vector<SweepRow>& rows) {
    json arr = json::array();
    for (const auto& r : rows) {
        arr.push_back({{"lambda1", r.lambda1},
                       {"mu1", r.mu1},
                       {"mu2", r.mu2},
                       {"mu3", r.mu3},
                       {"c_star", r.c_star},
                       {"branch", r.branch}});
    }
    return arr;
}

// minimal SVG polyline of c_*(lambda1)
void write_svg(const std::string& path, const std::vector<SweepRow>& rows,
               int dim) {
    if (rows.empty()) return;
    const double W = 640, H = 420, ml = 60, mr = 20, mt = 24, mb = 48;
    double xmin = rows.front().lambda1, xmax = rows.back().lambda1;
    double ymin = rows.front().c_star, ymax = ymin;
    for (const auto& r : rows) {
        ymin = std::min(ymin, r.c_star);
        ymax = std::max(ymax, r.c_star);
    }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
    auto X = [&](double x) {
        return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr);
    };
    auto Y = [&](double y) {
        return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb);
    };
    std::ofstream out(path);
    if (!out) throw Error("write_svg: cannot open " + path);
    char buf[256];
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" "
           "height=\"420\" viewBox=\"0 0 640 420\">\n";
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.6g\" y1=\"%.6g\" x2=\"%.6g\" y2=\"%.6g\" "
                  "stroke=\"black\"/>\n",
                  ml, H - mb, W - mr, H - mb);
    out << buf;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.6g\" y1=\"%.6g\" x2=\"%.6g\" y2=\"%.6g\" "
                  "stroke=\"black\"/>\n",
                  ml, H - mb, ml, mt);
    out << buf;
    out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" "
           "points=\"";
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.6g,%.6g ", X(r.lambda1), Y(r.c_star));
        out << buf;
    }
    out << "\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double x = xmin + (xmax - xmin) * i / 4.0;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%.6g\" y=\"%.6g\" font-size=\"11\" "
                      "text-anchor=\"middle\">%.4g</text>\n",
                      X(x), H - mb + 16, x);
        out << buf;
        const double y = ymin + (ymax - ymin) * i / 4.0;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%.6g\" y=\"%.6g\" font-size=\"11\" "
                      "text-anchor=\"end\">%.4g</text>\n",
                      ml - 6, Y(y) + 4, y);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.6g\" y=\"%.6g\" font-size=\"12\" "
                  "text-anchor=\"middle\">lambda1 (N = %d)</text>\n",
                  0.5 * (ml + W - mr), H - 10, dim);
    out << buf;
    out << "<text x=\"14\" y=\"210\" font-size=\"12\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 14 210)\">c_*</text>\n";
    out << "</svg>\n";
}

int cmd_spectrum(const CommonOpts& o, int count) {
    const RadialGrid grid = make_radial_grid(o.grid_size);
    const ResolvedCone rc = resolve_cone(o, false);
    const BubbleData bub = make_bubble_data(rc.cone, grid);
    const std::vector<EigenPair> spec =
        ordered_spectrum(o.dim, rc.lambda1, bub.S, count, TiePolicy::merge);

    // shooting cross-check
    int radial_needed = 0;
    for (const auto& p : spec)
        if (p.angular_index == 0) radial_needed = std::max(radial_needed, p.radial_index);
    std::vector<double> shoot0;
    if (radial_needed > 0)
        shoot0 = find_radial_eigenvalues(o.dim, 0.0, radial_needed, bub.k0);
    std::vector<double> shoot1;
    for (const auto& p : spec)
        if (p.angular_index == 1) {
            shoot1 = find_radial_eigenvalues(o.dim, rc.lambda1, 1, bub.k0);
            break;
        }

    json results = json::array();
    json residuals = json::array();
    for (const auto& p : spec) {
        const double shooting = p.angular_index == 0
                                    ? shoot0[p.radial_index - 1]
                                    : shoot1[p.radial_index - 1];
        const double rel = std::abs(shooting - p.mu) / p.mu;
        residuals.push_back(rel);
        results.push_back({{"mu", p.mu},
                           {"angular_index", p.angular_index},
                           {"radial_index", p.radial_index},
                           {"simple", p.simple},
                           {"shooting", shooting},
                           {"rel_residual", rel}});
    }

    if (o.format == "csv") {
        std::vector<SweepRow> rows{sweep_row(o.dim, rc.lambda1, bub.S)};
        emit_table_csv(o.dim, rows);
        for (std::size_t i = 0; i < spec.size(); ++i)
            std::printf("# mu_%zu closed %s shooting %s\n", i + 1,
                        fmt(spec[i].mu).c_str(),
                        fmt(results[i]["shooting"].get<double>()).c_str());
    } else {
        json j;
        j["config"] = config_json(o, "spectrum");
        j["config"]["lambda1_resolved"] = rc.lambda1;
        j["config"]["S_U"] = bub.S;
        j["config"]["k0"] = bub.k0;
        j["results"] = results;
        j["residuals"] = residuals;
        j["version"] = version;
        emit_json(j);
    }
    return 0;
}

int cmd_constant(const CommonOpts& o) {
    const RadialGrid grid = make_radial_grid(o.grid_size);
    const ResolvedCone rc = resolve_cone(o, false);
    const BubbleData bub = make_bubble_data(rc.cone, grid);
    const LocalConstant lc = local_constant(o.dim, rc.lambda1);
    const SweepRow row = sweep_row(o.dim, rc.lambda1, bub.S);

    if (o.format == "csv") {
        emit_table_csv(o.dim, {row});
        if (lc.degenerate)
            std::printf("# degenerate regime: lambda1 <= N-1, c_* <= 0\n");
    } else {
        json j;
        j["config"] = config_json(o, "constant");
        j["config"]["lambda1_resolved"] = rc.lambda1;
        json res;
        res["c_star"] = lc.c_star;
        res["branch"] = row.branch;
        res["degenerate"] = lc.degenerate;
        res["mu1"] = row.mu1;
        res["mu2"] = row.mu2;
        res["mu3"] = row.mu3;
        if (!lc.degenerate)
            res["one_minus_mu2_over_mu3"] = 1.0 - row.mu2 / row.mu3;
        j["results"] = json::array({res});
        j["residuals"] = json::array(
            {lc.degenerate ? 0.0
                           : std::abs(lc.c_star - (1.0 - row.mu2 / row.mu3))});
        j["version"] = version;
        emit_json(j);
    }
    return 0;
}

int cmd_sweep(const CommonOpts& o, const std::string& range,
              const std::string& plot, int jobs) {
    double lo = 0.0, hi = 0.0, step = 0.0;
    if (std::sscanf(range.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 ||
        step <= 0.0 || hi < lo)
        throw CLI::ValidationError("--lambda1-range", "expected lo:hi:step");

    std::vector<double> lambdas;
    for (double l = lo; l <= hi + 0.5 * step; l += step) lambdas.push_back(l);

    const RadialGrid grid = make_radial_grid(o.grid_size);
    const double measure =
        o.measure > 0.0 ? o.measure : 0.5 * sphere_measure(o.dim - 1);
    const ConeDomain cone = make_abstract_cone(o.dim, std::max(lo, 1e-8), measure);
    const double S = best_constant_bubble(cone, grid);

    std::vector<SweepRow> rows(lambdas.size());
    const int njobs = std::max(1, jobs);
    std::vector<std::future<void>> workers;
    std::atomic<std::size_t> next{0};
    for (int w = 0; w < njobs; ++w) {
        workers.push_back(std::async(std::launch::async, [&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= lambdas.size()) return;
                rows[i] = sweep_row(o.dim, lambdas[i], S);
            }
        }));
    }
    for (auto& w : workers) w.get();

    if (!plot.empty()) write_svg(plot, rows, o.dim);

    if (o.format == "csv") {
        emit_table_csv(o.dim, rows);
    } else {
        json j;
        j["config"] = config_json(o, "sweep");
        j["config"]["lambda1_range"] = range;
        j["config"]["S_U"] = S;
        j["results"] = rows_json(rows);
        j["residuals"] = json::array();
        j["version"] = version;
        emit_json(j);
    }
    return 0;
}

int cmd_deficit(const CommonOpts& o, const std::string& probe,
                std::vector<double> ds, double c, double s) {
    const RadialGrid grid = make_radial_grid(o.grid_size);
    const bool wants_mode = probe == "third" || probe == "mixed";
    const ResolvedCone rc = resolve_cone(o, wants_mode);
    const BubbleData bub = make_bubble_data(rc.cone, grid);
    if (ds.empty()) ds = {1e-2, 5e-3, 2.5e-3};

    const TestFunction U =
        tf_radial(rc.cone, bubble_profile(Bubble(o.dim, bub.k0)));

    json results = json::array();
    json residuals = json::array();
    auto push_report = [&](double d, const DeficitReport& rep) {
        results.push_back({{"d", d},
                           {"grad_norm_sq", rep.grad_norm_sq},
                           {"crit_norm_sq", rep.crit_norm_sq},
                           {"S_used", rep.S_used},
                           {"deficit", rep.deficit},
                           {"distance", rep.distance},
                           {"quotient", rep.quotient},
                           {"c0", rep.c0},
                           {"s0", rep.s0},
                           {"multimodal", rep.multimodal},
                           {"S_note", "deficit measured against the bubble "
                                      "quotient S_U"}});
        residuals.push_back(rep.deficit);
    };

    if (probe == "bubble" || probe == "scaled-bubble") {
        const double cc = probe == "bubble" ? 1.0 : c;
        const double ss = probe == "bubble" ? 1.0 : s;
        const TestFunction phi = tf_scale(
            tf_radial(rc.cone, bubble_profile(Bubble(o.dim, bub.k0, ss))), cc);
        push_report(0.0, deficit_report(phi, rc.cone, bub, grid));
    } else if (probe == "third") {
        const AngularEigen* mode = rc.mode ? &*rc.mode : nullptr;
        const TestFunction w3 =
            third_eigenfunction(rc.cone, rc.lambda1, bub, grid, mode);
        std::vector<ProbeRow> rows;
        for (double d : ds) {
            const TestFunction phi = tf_add(U, tf_scale(w3, d));
            const DeficitReport rep = deficit_report(phi, rc.cone, bub, grid);
            push_report(d, rep);
            rows.push_back({d, rep.deficit, rep.distance, rep.quotient});
        }
        if (rows.size() >= 3) {
            const Richardson rich = richardson_extrapolate(rows);
            const GapCheck gap = nondegeneracy_check(o.dim, rc.lambda1, bub.S);
            results.push_back({{"richardson_limit", rich.limit},
                               {"observed_order", rich.order},
                               {"one_minus_mu2_over_mu3", 1.0 - gap.mu2 / gap.mu3}});
        }
    } else if (probe == "mixed") {
        std::mt19937_64 rng(o.seed);
        auto uniform = [&](double a, double b) {
            return a + (b - a) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
        };
        TestFunction psi2 =
            tf_radial(rc.cone, ds_bubble_profile(o.dim, bub.k0, 1.0));
        psi2 = tf_scale(psi2, 1.0 / std::sqrt(grad_norm_sq(psi2, rc.cone, grid)));
        TestFunction psi3 =
            tf_radial(rc.cone, radial_eigenfunction(o.dim, 3, bub.k0));
        psi3 = tf_scale(psi3, 1.0 / std::sqrt(grad_norm_sq(psi3, rc.cone, grid)));
        for (double d : ds) {
            const double a2 = uniform(-d, d), a3 = uniform(-d, d);
            const TestFunction phi =
                tf_add(tf_add(U, tf_scale(psi2, a2)), tf_scale(psi3, a3));
            push_report(d, deficit_report(phi, rc.cone, bub, grid));
        }
    } else {
        throw CLI::ValidationError("--probe",
                                   "expected bubble|scaled-bubble|third|mixed");
    }

    if (o.format == "csv") {
        std::printf("d,deficit,distance,quotient\n");
        for (const auto& r : results) {
            if (!r.contains("d")) continue;
            std::printf("%s,%s,%s,%s\n", fmt(r["d"].get<double>()).c_str(),
                        fmt(r["deficit"].get<double>()).c_str(),
                        fmt(r["distance"].get<double>()).c_str(),
                        fmt(r["quotient"].get<double>()).c_str());
        }
    } else {
        json j;
        j["config"] = config_json(o, "deficit");
        j["config"]["probe"] = probe;
        j["config"]["lambda1_resolved"] = rc.lambda1;
        j["results"] = results;
        j["residuals"] = residuals;
        j["version"] = version;
        emit_json(j);
    }
    return 0;
}

int cmd_hardy(const CommonOpts& o, double eps, int trials) {
    const RadialGrid grid = make_radial_grid(o.grid_size);
    const ConeDomain cone =
        o.theta0 > 0.0 ? make_cap_cone(o.dim, o.theta0)
                       : make_abstract_cone(o.dim, 1.0,
                                            0.5 * sphere_measure(o.dim - 1));
    std::mt19937_64 rng(o.seed);
    auto uniform = [&](double a, double b) {
        return a + (b - a) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };

    json results = json::array();
    json residuals = json::array();
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const double a = 1.0 + static_cast<double>(rng() % 3);
        const double b = uniform(0.4, 2.0);
        const double c1 = uniform(-0.5, 2.0);
        const double c2 = uniform(-0.5, 2.0);
        SmoothRadialFn u;
        u.value = [=](double r) {
            const double q = r * r;
            return std::pow(r, a) * std::exp(-b * q) *
                   (1.0 + c1 * q + c2 * q * q);
        };
        u.deriv = [=](double r) {
            const double q = r * r;
            const double p = 1.0 + c1 * q + c2 * q * q;
            const double dp = c1 + 2.0 * c2 * q;
            return std::pow(r, a - 1.0) * std::exp(-b * q) *
                   (a * p + q * (2.0 * dp - 2.0 * b * p));
        };
        u.second_deriv = [](double) { return 0.0; };
        const HardyResult res = hardy_check(tf_radial(cone, u), o.dim, eps, grid);
        worst = std::max(worst, res.ratio - 1.0);
        results.push_back({{"case", t},
                           {"lhs", res.lhs},
                           {"rhs", res.rhs},
                           {"ratio", res.ratio}});
        residuals.push_back(res.ratio);
    }

    if (o.format == "csv") {
        std::printf("case,lhs,rhs,ratio\n");
        for (const auto& r : results)
            std::printf("%d,%s,%s,%s\n", r["case"].get<int>(),
                        fmt(r["lhs"].get<double>()).c_str(),
                        fmt(r["rhs"].get<double>()).c_str(),
                        fmt(r["ratio"].get<double>()).c_str());
    } else {
        json j;
        j["config"] = config_json(o, "hardy");
        j["config"]["eps"] = eps;
        j["config"]["trials"] = trials;
        j["results"] = results;
        j["residuals"] = residuals;
        j["version"] = version;
        emit_json(j);
    }
    if (worst > 1e-9) {
        std::fprintf(stderr, "hardy: inequality violated beyond tolerance\n");
        return 1;
    }
    return 0;
}

int cmd_verify(const CommonOpts& o) {
    const acceptance::Report rep = acceptance::run_all(o.seed, o.grid_size);
    emit_json(acceptance::to_json(rep, o.seed, o.grid_size));
    return rep.all_pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral analysis and quantitative Sobolev stability on cones"};
    app.set_config("--config", "", "INI config file (flags override values)");
    app.require_subcommand(1);

    CommonOpts o;
    int count = 3;
    std::string range, plot, probe = "third";
    std::vector<double> ds;
    double eps = 0.0, cval = 1.0, sval = 1.0;
    int jobs = 1, trials = 20;

    auto add_common = [&](CLI::App* sub, bool cone_args = true) {
        sub->add_option("--grid-size", o.grid_size, "radial quadrature nodes")
            ->check(CLI::Range(std::size_t{64}, std::size_t{65536}))
            ->capture_default_str();
        sub->add_option("--format", o.format, "json or csv")
            ->check(CLI::IsMember({"json", "csv"}))
            ->capture_default_str();
        sub->add_option("--seed", o.seed, "seed for randomized checks")
            ->capture_default_str();
        if (cone_args) {
            sub->add_option("--dim", o.dim, "ambient dimension N >= 3")
                ->required();
            auto* t = sub->add_option("--theta0", o.theta0,
                                      "cap aperture in (0, pi/2)");
            auto* l = sub->add_option("--lambda1", o.lambda1,
                                      "first Neumann eigenvalue of D");
            t->excludes(l);
            sub->add_option("--measure", o.measure,
                            "|D| for --lambda1 cones (default: hemisphere)");
        }
    };

    CLI::App* spectrum = app.add_subcommand(
        "spectrum", "ordered eigenvalues with shooting residuals");
    add_common(spectrum);
    spectrum->add_option("--count", count, "eigenvalues to list")
        ->capture_default_str();

    CLI::App* constant =
        app.add_subcommand("constant", "local stability constant c_*");
    add_common(constant);

    CLI::App* sweep =
        app.add_subcommand("sweep", "tabulate (lambda1, mu2, mu3, c_*)");
    add_common(sweep);
    sweep->add_option("--lambda1-range", range, "lo:hi:step")->required();
    sweep->add_option("--plot", plot, "write an SVG of c_*(lambda1)");
    sweep->add_option("--jobs", jobs, "parallel evaluations")
        ->check(CLI::Range(1, 256))
        ->capture_default_str();

    CLI::App* deficit =
        app.add_subcommand("deficit", "Sobolev deficit of a probe function");
    add_common(deficit);
    deficit->add_option("--probe", probe, "bubble|scaled-bubble|third|mixed")
        ->capture_default_str();
    deficit->add_option("--d", ds, "perturbation sizes");
    deficit->add_option("--c", cval, "scalar multiple for scaled-bubble");
    deficit->add_option("--s", sval, "dilation for scaled-bubble");

    CLI::App* verify =
        app.add_subcommand("verify", "run the verification suite (exit 3 on failure)");
    add_common(verify, false);

    CLI::App* hardy = app.add_subcommand("hardy", "weighted Hardy inequality check");
    add_common(hardy);
    hardy->add_option("--eps", eps, "weight exponent shift")->capture_default_str();
    hardy->add_option("--trials", trials, "number of random test functions")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (spectrum->parsed() || constant->parsed() || deficit->parsed()) {
            if (o.theta0 <= 0.0 && o.lambda1 <= 0.0)
                throw CLI::ValidationError("cone",
                                           "need exactly one of --theta0 / --lambda1");
        }
        if (spectrum->parsed()) return cmd_spectrum(o, count);
        if (constant->parsed()) return cmd_constant(o);
        if (sweep->parsed()) return cmd_sweep(o, range, plot, jobs);
        if (deficit->parsed()) return cmd_deficit(o, probe, ds, cval, sval);
        if (verify->parsed()) return cmd_verify(o);
        if (hardy->parsed()) return cmd_hardy(o, eps, trials);
    } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const DimensionTooSmall& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const ApertureOutOfRange& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
