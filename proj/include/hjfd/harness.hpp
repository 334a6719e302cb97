#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hjfd/adjoint.hpp"
#include "hjfd/grid.hpp"
#include "hjfd/hamiltonian.hpp"
#include "hjfd/initial_data.hpp"
#include "hjfd/numerical_flux.hpp"
#include "hjfd/oracle.hpp"
#include "hjfd/solver.hpp"

namespace hjfd {

inline constexpr const char* kLibraryVersion = "0.1.0";

struct HamiltonianSpec {
    std::string name = "quadratic"; // quadratic | power_even
    int power = 2;

    Hamiltonian build() const {
        if (name == "quadratic") return Hamiltonian::quadratic();
        if (name == "power_even") return Hamiltonian::power_even(power);
        throw std::invalid_argument("unknown hamiltonian: " + name);
    }
};

struct FluxSpec {
    std::string name = "upwind"; // upwind | crandall_lions | split | smoothed_upwind
    double gamma = 0.0;          // 0 = auto (gamma_bound on the a-priori box)
    double eps = 1e-3;

    NumericalFlux build(const Hamiltonian& h, double box_radius) const {
        if (name == "upwind") {
            if (h.kind() != Hamiltonian::Kind::quadratic)
                throw std::invalid_argument("upwind flux is tied to the quadratic Hamiltonian");
            return NumericalFlux::upwind_quadratic();
        }
        if (name == "smoothed_upwind") {
            if (h.kind() != Hamiltonian::Kind::quadratic)
                throw std::invalid_argument("smoothed_upwind flux is tied to the quadratic Hamiltonian");
            return NumericalFlux::smoothed_upwind(eps);
        }
        if (name == "crandall_lions")
            return NumericalFlux::crandall_lions(h, gamma > 0.0 ? gamma : gamma_bound(h, box_radius));
        if (name == "split") return NumericalFlux::split(h);
        throw std::invalid_argument("unknown flux: " + name);
    }
};

/// Full description of a convergence experiment; everything an identical
/// re-run needs.
struct ExperimentConfig {
    HamiltonianSpec hamiltonian;
    FluxSpec flux;
    InitialDataSpec u0;
    double T = 1.0;
    double cfl = 0.5;
    Integrator integrator = Integrator::euler;
    std::vector<std::pair<int, int>> h_list; // (n, m) pairs, h strictly decreasing
    std::string oracle = "hopf";             // hopf | fine
    int fine_reference_n = 2048;
    unsigned seed = 12345;
    int error_time_stride = 0; // 0 = auto (about 512 sampled times), 1 = every step
    std::string out_dir = "out";
    bool svg = false;

    void validate() const {
        if (h_list.empty()) throw std::invalid_argument("config: empty h_list");
        double prev = std::numeric_limits<double>::infinity();
        for (const auto& [n, m] : h_list) {
            if (n < 2 || m < 1 || m >= n) throw std::invalid_argument("config: invalid (n, m) pair");
            const double h = static_cast<double>(m) / n;
            if (!(h < prev)) throw std::invalid_argument("config: h_list must be strictly decreasing");
            prev = h;
        }
        if (oracle != "hopf" && oracle != "fine")
            throw std::invalid_argument("config: oracle must be hopf or fine");
    }
};

struct ResultRow {
    double h = 0.0;
    int n = 0;
    int m = 1;
    double dt = 0.0;
    double sup_error = 0.0;
    double local_rate = std::numeric_limits<double>::quiet_NaN();
    double lip_excess = 0.0;    // gradient bound excess
    double second_excess = 0.0; // one-sided chord-gap excess
    double sup_excess = 0.0;    // sup bound excess
    double energy410 = std::numeric_limits<double>::quiet_NaN();
    double energy413 = std::numeric_limits<double>::quiet_NaN();
};

struct RateFit {
    double slope = std::numeric_limits<double>::quiet_NaN();
    double intercept = std::numeric_limits<double>::quiet_NaN();
    double sqrt_rate_constant = std::numeric_limits<double>::quiet_NaN(); // max err / sqrt(h)
    bool degenerate = false; // every error at rounding level: "exact"
};

struct ResultTable {
    std::vector<ResultRow> rows;
    RateFit fit;
};

/// Least-squares log-log slope over rows with errors above rounding level,
/// plus the measured sqrt-law constant max_k err_k / sqrt(h_k).
inline RateFit fit_rate(const std::vector<ResultRow>& rows) {
    RateFit fit;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, cmax = 0;
    int count = 0;
    for (const ResultRow& r : rows) {
        if (!(r.sup_error > 1e-13)) continue;
        const double lx = std::log(r.h), ly = std::log(r.sup_error);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        cmax = std::max(cmax, r.sup_error / std::sqrt(r.h));
        ++count;
    }
    if (count < 3) {
        fit.degenerate = true;
        return fit;
    }
    fit.slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / count;
    fit.sqrt_rate_constant = cmax;
    return fit;
}

struct StudyResult {
    ResultTable table;
    std::vector<double> row_seconds;
    double total_seconds = 0.0;
    std::string oracle_identity;
    std::vector<int> dirac_nodes; // terminal Dirac node used per row
};

/// One solver run per h: forward states every step, evolved gradient (and
/// curvature where the flux allows), bound monitors, sup-over-time oracle
/// error, and the two space-time energies via the backward measure with
/// terminal Dirac at the node maximizing v(T)^2/2.
inline StudyResult convergence_study(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto t_start = std::chrono::steady_clock::now();
    const Hamiltonian ham = cfg.hamiltonian.build();

    StudyResult out;
    double lip_norm = 0.0;
    {
        const InitialData probe = cfg.u0.materialize(PeriodicGrid(cfg.h_list.front().first));
        lip_norm = probe.lip_norm;
    }
    const double box_radius = lip_norm + 1.0;
    const NumericalFlux flux = cfg.flux.build(ham, box_radius);

    HopfLaxOracle oracle(ExactSolution{[spec = cfg.u0](double x) { return spec.evaluate(x); }, ham,
                                       box_radius});
    out.oracle_identity = cfg.oracle == "hopf"
                              ? "hopf_lax"
                              : "fine_reference(n=" + std::to_string(cfg.fine_reference_n) + ")";

    for (const auto& [n, m] : cfg.h_list) {
        const auto t_row = std::chrono::steady_clock::now();
        const PeriodicGrid grid(n);
        const InitialData data = cfg.u0.materialize(grid);
        Trajectory traj = solve(data, flux, ShiftParam{m}, cfg.T, cfg.cfl, cfg.integrator, 1);
        evolve_gradient(traj);
        if (traj.flux.has_hessian()) evolve_second(traj);
        const MonitorReport mon = monitor_bounds(traj);

        double sup_error = 0.0;
        if (cfg.oracle == "hopf") {
            const int steps = traj.config.steps;
            const int stride = cfg.error_time_stride > 0
                                   ? cfg.error_time_stride
                                   : std::max(1, steps / 512);
            for (int k = 0; k <= steps; k += stride) {
                const int kk = std::min(k, steps);
                sup_error = std::max(sup_error,
                                     sup_distance(traj.states[static_cast<std::size_t>(kk)],
                                                  oracle.profile(grid, traj.times[static_cast<std::size_t>(kk)])));
                if (kk == steps) break;
            }
            if (steps % stride != 0)
                sup_error = std::max(sup_error, sup_distance(traj.states.back(),
                                                             oracle.profile(grid, traj.times.back())));
        } else {
            const GridFunction ref =
                fine_reference(cfg.u0, flux, cfg.T, cfg.fine_reference_n, grid, cfg.cfl);
            sup_error = sup_distance(traj.states.back(), ref);
        }

        int dirac_node = 0;
        {
            const GridFunction& v_end = traj.gradient_states.back();
            double best = -1.0;
            for (int i = 0; i < n; ++i)
                if (std::abs(v_end[i]) > best) {
                    best = std::abs(v_end[i]);
                    dirac_node = i;
                }
        }
        const AdjointTrajectory adj = propagate_adjoint(traj, DiscreteMeasure::dirac(grid, dirac_node));
        const double e410 = energy_flux_integral(traj, adj);
        const double e413 = traj.flux.kind() == NumericalFlux::Kind::crandall_lions
                                ? compensated_energy(traj)
                                : std::numeric_limits<double>::quiet_NaN();

        ResultRow row;
        row.h = ShiftParam{m}.h(grid);
        row.n = n;
        row.m = m;
        row.dt = traj.config.dt;
        row.sup_error = sup_error;
        row.lip_excess = mon.gradient_excess_max;
        row.second_excess = mon.chord_gap_excess_max;
        row.sup_excess = mon.sup_excess_max;
        row.energy410 = e410;
        row.energy413 = e413;
        out.table.rows.push_back(row);
        out.dirac_nodes.push_back(dirac_node);
        out.row_seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t_row).count());
    }

    for (std::size_t k = 1; k < out.table.rows.size(); ++k) {
        ResultRow& cur = out.table.rows[k];
        const ResultRow& prev = out.table.rows[k - 1];
        if (cur.sup_error > 0.0 && prev.sup_error > 0.0)
            cur.local_rate = std::log(prev.sup_error / cur.sup_error) / std::log(prev.h / cur.h);
    }
    out.table.fit = fit_rate(out.table.rows);
    out.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return out;
}

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

/// Fixed CSV layout:
///   h,n,dt,sup_error,local_rate,lip_excess,second_excess,sup_excess,energy410,energy413
inline std::string result_table_csv(const ResultTable& table) {
    std::string out = "h,n,dt,sup_error,local_rate,lip_excess,second_excess,sup_excess,energy410,energy413\n";
    for (const ResultRow& r : table.rows) {
        out += detail::format_double(r.h);
        out += ',' + std::to_string(r.n);
        out += ',' + detail::format_double(r.dt);
        out += ',' + detail::format_double(r.sup_error);
        out += ',' + detail::format_double(r.local_rate);
        out += ',' + detail::format_double(r.lip_excess);
        out += ',' + detail::format_double(r.second_excess);
        out += ',' + detail::format_double(r.sup_excess);
        out += ',' + detail::format_double(r.energy410);
        out += ',' + detail::format_double(r.energy413);
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Config serialization: a plain key = value text format and a JSON manifest
// that echoes the full config (re-running from a manifest reproduces the
// run bit-for-bit: same dt sequence, same seeds, same reduction order).
// ---------------------------------------------------------------------------

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["hamiltonian"] = {{"name", cfg.hamiltonian.name}, {"power", cfg.hamiltonian.power}};
    j["flux"] = {{"name", cfg.flux.name}, {"gamma", cfg.flux.gamma}, {"eps", cfg.flux.eps}};
    j["u0"] = {{"name", cfg.u0.name()}, {"harmonic", cfg.u0.harmonic}, {"amplitude", cfg.u0.amplitude}};
    j["T"] = cfg.T;
    j["cfl"] = cfg.cfl;
    j["integrator"] = integrator_name(cfg.integrator);
    nlohmann::json hs = nlohmann::json::array();
    for (const auto& [n, m] : cfg.h_list) hs.push_back({n, m});
    j["h_list"] = hs;
    j["oracle"] = cfg.oracle;
    j["fine_reference_n"] = cfg.fine_reference_n;
    j["seed"] = cfg.seed;
    j["error_time_stride"] = cfg.error_time_stride;
    j["out_dir"] = cfg.out_dir;
    j["svg"] = cfg.svg;
    return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    cfg.hamiltonian.name = j.at("hamiltonian").at("name").get<std::string>();
    cfg.hamiltonian.power = j.at("hamiltonian").at("power").get<int>();
    cfg.flux.name = j.at("flux").at("name").get<std::string>();
    cfg.flux.gamma = j.at("flux").at("gamma").get<double>();
    cfg.flux.eps = j.at("flux").at("eps").get<double>();
    cfg.u0 = InitialDataSpec::named(j.at("u0").at("name").get<std::string>(),
                                    j.at("u0").at("harmonic").get<int>(),
                                    j.at("u0").at("amplitude").get<double>());
    cfg.T = j.at("T").get<double>();
    cfg.cfl = j.at("cfl").get<double>();
    cfg.integrator = j.at("integrator").get<std::string>() == "rk4" ? Integrator::rk4 : Integrator::euler;
    cfg.h_list.clear();
    for (const auto& pair : j.at("h_list"))
        cfg.h_list.emplace_back(pair.at(0).get<int>(), pair.at(1).get<int>());
    cfg.oracle = j.at("oracle").get<std::string>();
    cfg.fine_reference_n = j.at("fine_reference_n").get<int>();
    cfg.seed = j.at("seed").get<unsigned>();
    cfg.error_time_stride = j.at("error_time_stride").get<int>();
    cfg.out_dir = j.at("out_dir").get<std::string>();
    cfg.svg = j.at("svg").get<bool>();
    return cfg;
}

inline std::string manifest_json(const std::string& command, const ExperimentConfig& cfg,
                                 const StudyResult& study) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["tool"] = "hjfd";
    j["version"] = kLibraryVersion;
    j["command"] = command;
    j["config"] = config_to_json(cfg);
    j["oracle_identity"] = study.oracle_identity;
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t k = 0; k < study.table.rows.size(); ++k) {
        const ResultRow& r = study.table.rows[k];
        nlohmann::json row;
        row["h"] = r.h;
        row["n"] = r.n;
        row["m"] = r.m;
        row["dt"] = r.dt;
        row["sup_error"] = r.sup_error;
        row["local_rate"] = detail::format_double(r.local_rate);
        row["lip_excess"] = r.lip_excess;
        row["second_excess"] = r.second_excess;
        row["sup_excess"] = r.sup_excess;
        row["energy410"] = r.energy410;
        row["energy413"] = detail::format_double(r.energy413);
        row["dirac_node"] = study.dirac_nodes.size() > k ? study.dirac_nodes[k] : -1;
        row["seconds"] = study.row_seconds.size() > k ? study.row_seconds[k] : 0.0;
        rows.push_back(row);
    }
    j["rows"] = rows;
    j["fit"] = {{"slope", detail::format_double(study.table.fit.slope)},
                {"intercept", detail::format_double(study.table.fit.intercept)},
                {"sqrt_rate_constant", detail::format_double(study.table.fit.sqrt_rate_constant)},
                {"degenerate", study.table.fit.degenerate}};
    j["total_seconds"] = study.total_seconds;
    return j.dump(2) + "\n";
}

/// Parse a `key = value` config body (# starts a comment) into cfg.
inline void apply_config_text(const std::string& text, ExperimentConfig& cfg) {
    std::istringstream in(text);
    std::string line;
    const auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "hamiltonian") cfg.hamiltonian.name = value;
        else if (key == "power") cfg.hamiltonian.power = std::stoi(value);
        else if (key == "flux") cfg.flux.name = value;
        else if (key == "gamma") cfg.flux.gamma = value == "auto" ? 0.0 : std::stod(value);
        else if (key == "eps") cfg.flux.eps = std::stod(value);
        else if (key == "u0") cfg.u0 = InitialDataSpec::named(value, cfg.u0.harmonic, cfg.u0.amplitude);
        else if (key == "u0_k") cfg.u0.harmonic = std::stoi(value);
        else if (key == "u0_amplitude") cfg.u0.amplitude = std::stod(value);
        else if (key == "T") cfg.T = std::stod(value);
        else if (key == "cfl") cfg.cfl = std::stod(value);
        else if (key == "integrator") {
            if (value != "euler" && value != "rk4")
                throw std::invalid_argument("config: integrator must be euler or rk4");
            cfg.integrator = value == "rk4" ? Integrator::rk4 : Integrator::euler;
        } else if (key == "h_list") {
            cfg.h_list.clear();
            std::istringstream items(value);
            std::string item;
            while (std::getline(items, item, ',')) {
                const auto colon = item.find(':');
                if (colon == std::string::npos)
                    throw std::invalid_argument("config: h_list entries are n:m pairs");
                cfg.h_list.emplace_back(std::stoi(item.substr(0, colon)),
                                        std::stoi(item.substr(colon + 1)));
            }
        } else if (key == "oracle") cfg.oracle = value;
        else if (key == "fine_n") cfg.fine_reference_n = std::stoi(value);
        else if (key == "seed") cfg.seed = static_cast<unsigned>(std::stoul(value));
        else if (key == "error_time_stride") cfg.error_time_stride = std::stoi(value);
        else if (key == "out") cfg.out_dir = value;
        else if (key == "svg") cfg.svg = value == "1" || value == "true";
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
}

/// Load either a key = value config body or a JSON manifest (round-trip).
inline ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        const nlohmann::json j = nlohmann::json::parse(text);
        return config_from_json(j.contains("config") ? j.at("config") : j);
    }
    apply_config_text(text, cfg);
    return cfg;
}

// ---------------------------------------------------------------------------
// Minimal static SVG: log-log error plot, one polyline per labelled series.
// ---------------------------------------------------------------------------

struct SvgSeries {
    std::string label;
    std::vector<std::pair<double, double>> points; // (h, error)
};

inline std::string svg_loglog_plot(const std::vector<SvgSeries>& series,
                                   const std::string& title = "sup error vs h") {
    constexpr int width = 640, height = 480, left = 70, right = 20, top = 40, bottom = 50;
    double xmin = std::numeric_limits<double>::infinity(), xmax = 0;
    double ymin = xmin, ymax = 0;
    for (const SvgSeries& s : series)
        for (const auto& [x, y] : s.points) {
            if (x > 0) {
                xmin = std::min(xmin, x);
                xmax = std::max(xmax, x);
            }
            if (y > 0) {
                ymin = std::min(ymin, y);
                ymax = std::max(ymax, y);
            }
        }
    if (!(xmin < xmax)) {
        xmin = 1e-3;
        xmax = 1.0;
    }
    if (!(ymin < ymax)) {
        ymin = 1e-12;
        ymax = 1.0;
    }
    const double lx0 = std::log10(xmin), lx1 = std::log10(xmax);
    const double ly0 = std::log10(ymin), ly1 = std::log10(ymax);
    const auto px = [&](double x) {
        return left + (std::log10(x) - lx0) / (lx1 - lx0) * (width - left - right);
    };
    const auto py = [&](double y) {
        return height - bottom - (std::log10(y) - ly0) / (ly1 - ly0) * (height - top - bottom);
    };
    static const char* colors[] = {"#1f6fb2", "#c44e52", "#55a868", "#8172b2", "#ccb974"};

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "' viewBox='0 0 " << width << ' ' << height << "'>\n";
    svg << "<rect width='100%' height='100%' fill='white'/>\n";
    svg << "<text x='" << width / 2 << "' y='22' text-anchor='middle' font-size='15'>" << title
        << "</text>\n";
    svg << "<rect x='" << left << "' y='" << top << "' width='" << width - left - right
        << "' height='" << height - top - bottom << "' fill='none' stroke='black'/>\n";
    for (int e = static_cast<int>(std::ceil(lx0)); e <= static_cast<int>(std::floor(lx1)); ++e) {
        const double x = px(std::pow(10.0, e));
        svg << "<line x1='" << x << "' y1='" << top << "' x2='" << x << "' y2='" << height - bottom
            << "' stroke='#dddddd'/>\n";
        svg << "<text x='" << x << "' y='" << height - bottom + 18
            << "' text-anchor='middle' font-size='11'>1e" << e << "</text>\n";
    }
    for (int e = static_cast<int>(std::ceil(ly0)); e <= static_cast<int>(std::floor(ly1)); ++e) {
        const double y = py(std::pow(10.0, e));
        svg << "<line x1='" << left << "' y1='" << y << "' x2='" << width - right << "' y2='" << y
            << "' stroke='#dddddd'/>\n";
        svg << "<text x='" << left - 8 << "' y='" << y + 4 << "' text-anchor='end' font-size='11'>1e"
            << e << "</text>\n";
    }
    svg << "<text x='" << width / 2 << "' y='" << height - 12
        << "' text-anchor='middle' font-size='12'>h</text>\n";
    int idx = 0;
    for (const SvgSeries& s : series) {
        const char* color = colors[idx % 5];
        svg << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
        for (const auto& [x, y] : s.points)
            if (x > 0 && y > 0) svg << px(x) << ',' << py(y) << ' ';
        svg << "'/>\n";
        for (const auto& [x, y] : s.points)
            if (x > 0 && y > 0)
                svg << "<circle cx='" << px(x) << "' cy='" << py(y) << "' r='3' fill='" << color
                    << "'/>\n";
        svg << "<text x='" << width - right - 8 << "' y='" << top + 16 + 16 * idx
            << "' text-anchor='end' font-size='12' fill='" << color << "'>" << s.label
            << "</text>\n";
        ++idx;
    }
    svg << "</svg>\n";
    return svg.str();
}

} // namespace hjfd
