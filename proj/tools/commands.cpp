#include "commands.hpp"

#include "vwave/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#ifndef VWAVE_VERSION
#define VWAVE_VERSION "unknown"
#endif

namespace vwave::cli {

namespace {

constexpr double kDeg = kPi / 180.0;

nlohmann::json header(const std::string& command, const RunConfig& cfg)
{
    nlohmann::json j;
    j["artifact"] = "vwave";
    j["version"] = VWAVE_VERSION;
    j["command"] = command;
    j["config"] = cfg.to_json();
    return j;
}

std::string number(double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw ConfigError("cannot write '" + path.string() + "'");
    f << text;
}

double norm2(const GridFunction& u)
{
    double acc = 0.0;
    for (double v : u.values)
        acc += v * v;
    return acc * std::pow(u.grid().h, u.grid().dim);
}

ThresholdStudy study_for(const RunConfig& cfg)
{
    return threshold_study(cfg.omega(), cfg.order(), cfg.h_levels, cfg.solver());
}

nlohmann::json study_json(const ThresholdStudy& st)
{
    nlohmann::json j;
    j["h_levels"] = st.h;
    j["lambda"] = st.values;
    j["extrapolated"] = st.extrapolated;
    j["eps_disc"] = st.eps_disc;
    return j;
}

nlohmann::json eig_json(const EigenResult& r)
{
    nlohmann::json j;
    j["values"] = r.values;
    j["residuals"] = r.residuals;
    j["threshold"] = r.threshold;
    j["reference_threshold"] = r.reference_threshold;
    j["arm_threshold"] = r.arm_threshold;
    j["eps_disc"] = r.eps_disc;
    j["count"] = r.below_threshold_count;
    j["partial"] = r.partial;
    j["iterations"] = r.iterations;
    return j;
}

} // namespace

nlohmann::json threshold_record(const RunConfig& cfg)
{
    const auto st = study_for(cfg);
    auto j = header("threshold", cfg);
    j["s"] = cfg.s;
    j["threshold"] = study_json(st);
    const Grid& g = st.phi.grid();
    j["phi"] = {{"h", g.h}, {"origin", std::vector<double>(g.origin.begin(), g.origin.begin() + g.dim)},
                {"counts", std::vector<std::int64_t>(g.counts.begin(), g.counts.begin() + g.dim)},
                {"values", st.phi.values}};
    return j;
}

nlohmann::json eigs_record(const RunConfig& cfg)
{
    const auto st = study_for(cfg);
    const auto solver = cfg.solver();
    EigsOptions opt;
    opt.k = cfg.k;
    opt.arm_control = cfg.arm_control;
    const Waveguide w{cfg.beta_deg * kDeg, cfg.omega(), cfg.truncation_L};
    const auto r = waveguide_eigs(w, cfg.order(), cfg.h, st, opt, solver);

    auto j = header("eigs", cfg);
    j["threshold"] = study_json(st);
    j["beta_rad"] = w.beta;
    j["eigs"] = eig_json(r);
    j["margin"] = r.threshold - r.values.front();
    if (cfg.truncation_audit) {
        const auto r2 = waveguide_eigs(w.with_truncation(1.5 * w.truncation_L), cfg.order(), cfg.h, st, opt, solver);
        j["truncation_audit"] = {{"L", w.truncation_L},
                                 {"L_scaled", 1.5 * w.truncation_L},
                                 {"eigs_scaled", eig_json(r2)},
                                 {"margin_scaled", r2.threshold - r2.values.front()},
                                 {"drift", r2.values.front() - r.values.front()}};
    }
    return j;
}

SweepResult sweep_rows(const RunConfig& cfg, ThresholdStudy* study_out)
{
    if (cfg.angles_deg.empty())
        throw ConfigError("sweep needs a non-empty angles_deg");
    auto st = study_for(cfg);
    std::vector<double> rad;
    for (double a : cfg.angles_deg)
        rad.push_back(a * kDeg);
    auto r = angle_sweep(cfg.order(), rad, cfg.omega(), st, cfg.sweep_policy(), cfg.solver());
    if (study_out)
        *study_out = std::move(st);
    return r;
}

std::string sweep_csv(const SweepResult& r, int k)
{
    std::ostringstream os;
    os << "alpha_rad";
    for (int j = 1; j <= k; ++j)
        os << ",lambda_" << j;
    os << ",threshold,lower_bound,count\n";
    for (const auto& row : r.rows) {
        os << number(row.alpha);
        for (int j = 0; j < k; ++j) {
            os << ',';
            if (j < static_cast<int>(row.lambdas.size()))
                os << number(row.lambdas[static_cast<std::size_t>(j)]);
        }
        os << ',' << number(row.threshold) << ',' << number(row.lower_bound) << ',' << row.count << '\n';
    }
    return os.str();
}

std::string sweep_svg(const SweepResult& r)
{
    const double W = 640, H = 420, ml = 70, mr = 20, mt = 20, mb = 50;
    double a0 = 0.0, a1 = kPi / 2, y0 = 1e300, y1 = -1e300;
    for (const auto& row : r.rows) {
        y0 = std::min({y0, row.lower_bound, row.lambda_1});
        y1 = std::max({y1, row.threshold, row.lambda_1});
    }
    if (r.rows.empty() || !(y1 > y0)) {
        y0 = 0.0;
        y1 = 1.0;
    }
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto X = [&](double a) { return ml + (a - a0) / (a1 - a0) * (W - ml - mr); };
    auto Y = [&](double v) { return mt + (y1 - v) / (y1 - y0) * (H - mt - mb); };
    auto line = [&](auto get, const char* colour, const char* dash) {
        std::ostringstream p;
        p << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\"" << dash << " points=\"";
        for (const auto& row : r.rows)
            p << number(X(row.alpha)) << ',' << number(Y(get(row))) << ' ';
        p << "\"/>\n";
        return p.str();
    };
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\"" << H - mb
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
    for (int d = 0; d <= 90; d += 15) {
        const double x = X(d * kDeg);
        os << "<text x=\"" << x << "\" y=\"" << H - mb + 18 << "\" font-size=\"12\" text-anchor=\"middle\">" << d
           << "</text>\n";
    }
    for (int i = 0; i <= 4; ++i) {
        const double v = y0 + (y1 - y0) * i / 4.0;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", v);
        os << "<text x=\"" << ml - 6 << "\" y=\"" << Y(v) + 4 << "\" font-size=\"12\" text-anchor=\"end\">" << buf
           << "</text>\n";
    }
    os << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 10
       << "\" font-size=\"13\" text-anchor=\"middle\">angle (degrees)</text>\n";
    os << line([](const SweepRow& row) { return row.threshold; }, "#444444", " stroke-dasharray=\"6,4\"");
    os << line([](const SweepRow& row) { return row.lower_bound; }, "#2a7ab0", " stroke-dasharray=\"2,3\"");
    os << line([](const SweepRow& row) { return row.lambda_1; }, "#c0392b", "");
    for (const auto& row : r.rows)
        os << "<circle cx=\"" << number(X(row.alpha)) << "\" cy=\"" << number(Y(row.lambda_1))
           << "\" r=\"3\" fill=\"#c0392b\"/>\n";
    os << "<text x=\"" << W - mr - 4 << "\" y=\"" << mt + 14
       << "\" font-size=\"12\" text-anchor=\"end\">red: lambda_1, dashed: threshold, dotted: (1 - cos a) threshold</text>\n";
    os << "</svg>\n";
    return os.str();
}

nlohmann::json certify_record(const RunConfig& cfg)
{
    if (cfg.R_list.empty())
        throw ConfigError("certify needs a non-empty R_list");
    const auto st = study_for(cfg);
    const FracOrder s = cfg.order();
    const double beta = cfg.beta_deg * kDeg;
    const Waveguide w{beta, cfg.omega(), cfg.truncation_L};
    const auto tc = cfg.trial();
    ThresholdResult ground{st.values.back(), st.phi, 0.0};

    auto j = header("certify", cfg);
    j["threshold"] = study_json(st);
    nlohmann::json records = nlohmann::json::array();
    double min_gap = std::numeric_limits<double>::infinity();
    bool audit_ok = true, i1_ok = true, i23_ok = true;
    std::vector<double> Rs, decay;
    for (double R : cfg.R_list) {
        const auto trial = build_trial(w, s, R, ground, tc);
        const auto d = decompose_trial(trial, tc);
        const auto& p = trial.params;
        const double scale = std::abs(d.I1) + std::abs(d.I21) + std::abs(d.I22) + std::abs(p.epsilon * d.I3);
        records.push_back({{"R", R},
                           {"epsilon", p.epsilon},
                           {"gamma", p.gamma},
                           {"sign", p.sign},
                           {"relocations", p.relocations},
                           {"radial_cutoff", p.radial},
                           {"I1", d.I1},
                           {"I21", d.I21},
                           {"I22", d.I22},
                           {"I23", d.I23},
                           {"I3", d.I3},
                           {"I3_boundary", d.I3_boundary},
                           {"I4", d.I4},
                           {"total", d.total},
                           {"rayleigh_gap", d.rayleigh_gap},
                           {"lambda_model", d.lambda},
                           {"trace_norm", d.trace_norm},
                           {"mismatch", d.mismatch},
                           {"quadrature_level", d.quadrature_level}});
        min_gap = std::min(min_gap, d.rayleigh_gap);
        audit_ok = audit_ok && d.mismatch <= 0.05;
        i1_ok = i1_ok && d.I1 <= 1e-9 * scale;
        i23_ok = i23_ok && std::abs(d.I23) <= 1e-9 * scale;
        Rs.push_back(R);
        decay.push_back(d.I21 + d.I22);
    }
    j["trial"] = records;
    const auto [case_exp, with_log] = case_decay(w.dim(), s);
    const double fitted = Rs.size() >= 2 ? fit_decay_exponent(Rs, decay, with_log) : std::nan("");
    const bool existence = min_gap < -st.eps_disc;
    const bool decay_ok = std::abs(fitted - case_exp) <= 0.2;
    j["decay"] = {{"case_exponent", case_exp}, {"log_factor", with_log}, {"fitted_exponent", fitted},
                  {"consistent", decay_ok}};

    // pushforward and remainder audits on the ground state at beta
    const Waveguide wp{beta, cfg.omega(), cfg.pushforward_L};
    EigsOptions opt;
    opt.arm_control = cfg.arm_control;
    const auto solver = cfg.solver();
    const auto r = waveguide_eigs(wp, s, cfg.h, st, opt, solver);
    const auto& u = r.vectors.front();
    const auto fc = form_config_for(cfg.omega(), solver);
    const double q_beta = rayleigh(u, s, fc);
    nlohmann::json chain = nlohmann::json::array();
    chain.push_back({{"alpha_rad", beta}, {"rayleigh", q_beta}, {"norm", norm2(u)}});
    std::vector<double> angles = cfg.pushforward_deg;
    std::sort(angles.begin(), angles.end(), std::greater<>());
    bool chain_ok = true;
    double prev = q_beta;
    for (double a : angles) {
        if (a * kDeg == beta)
            continue;
        const auto v = pushforward(u, wp, a * kDeg);
        const double q = rayleigh(v, s, fc);
        chain.push_back({{"alpha_rad", a * kDeg}, {"rayleigh", q}, {"norm", norm2(v)}});
        chain_ok = chain_ok && q < prev;
        prev = q;
    }
    auto ec = cfg.extension();
    ec.cell = fc;
    const auto U = cs_extend(u, s, default_slices(u, s, ec), ec.cell);
    const auto V = straighten_extension(U, beta);
    const double cs = cs_constant(s);
    const double energy = cs * weighted_energy(V, s);
    const double rem = remainder_term(V, s);
    const double form = q_beta * norm2(u);
    const double identity = std::abs(energy + std::cos(beta) * rem - form) / form;
    const bool below = r.values.front() < r.threshold;
    j["pushforward"] = {{"lambda_1", r.values.front()},
                        {"threshold", r.threshold},
                        {"below_threshold", below},
                        {"chain", chain},
                        {"chain_decreasing", chain_ok},
                        {"form", form},
                        {"cs_energy_straightened", energy},
                        {"remainder", rem},
                        {"identity_mismatch", identity},
                        {"identity_ok", identity <= 0.05},
                        {"remainder_negative", rem < 0.0},
                        {"am_gm", std::abs(rem) <= energy}};
    j["verdict"] = {{"existence_certified", existence},
                    {"min_rayleigh_gap", min_gap},
                    {"decomposition_audit", audit_ok},
                    {"I1_nonpositive", i1_ok},
                    {"I23_vanishes", i23_ok},
                    {"decay_consistent", decay_ok},
                    {"pushforward_chain", chain_ok},
                    {"remainder_identity", identity <= 0.05 && rem < 0.0}};
    return j;
}

int run_command(const std::string& command, const RunConfig& cfg, const Outputs& out, std::ostream& log)
{
    cfg.validate();
    const std::filesystem::path dir(out.dir);
    if (command == "threshold") {
        const auto j = threshold_record(cfg);
        write_file(dir / "threshold.json", j.dump(2) + "\n");
        log << "threshold " << j["threshold"]["lambda"].back().get<double>() << " eps_disc "
            << j["threshold"]["eps_disc"].get<double>() << "\n";
        return kExitOk;
    }
    if (command == "eigs") {
        const auto j = eigs_record(cfg);
        write_file(dir / "eigs.json", j.dump(2) + "\n");
        log << "lambda_1 " << j["eigs"]["values"][0].get<double>() << " count " << j["eigs"]["count"].get<int>()
            << "\n";
        return kExitOk;
    }
    if (command == "sweep") {
        ThresholdStudy st;
        const auto r = sweep_rows(cfg, &st);
        write_file(dir / "sweep.csv", sweep_csv(r, cfg.k));
        if (!out.plot.empty())
            write_file(out.plot, sweep_svg(r));
        log << "rows " << r.rows.size() << " counts_nonincreasing " << r.counts_nonincreasing << " lambda_increasing "
            << r.lambda_increasing << " squeeze " << r.consistent << "\n";
        return r.counts_nonincreasing && r.lambda_increasing && r.consistent ? kExitOk : kExitNotCertified;
    }
    if (command == "certify") {
        const auto j = certify_record(cfg);
        write_file(dir / "certify.json", j.dump(2) + "\n");
        bool all = true;
        for (const auto& [k, v] : j["verdict"].items())
            if (v.is_boolean())
                all = all && v.get<bool>();
        log << "min gap " << j["verdict"]["min_rayleigh_gap"].get<double>() << " certified " << all << "\n";
        return all ? kExitOk : kExitNotCertified;
    }
    throw ConfigError("unknown command '" + command + "' (threshold | eigs | sweep | certify)");
}

int exit_code_for(const std::exception& e)
{
    return is_input_error(e) ? kExitConfig : kExitNumerical;
}

} // namespace vwave::cli
