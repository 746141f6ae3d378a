// scenario.cpp — Config parsing, sweep dispatch and CSV output

#include "rcpump/scenario.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace rcpump {

namespace {

namespace pt = boost::property_tree;

std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

const std::set<std::string> kSweepable = {"omega", "phase", "dot_amplitude", "amp_left", "amp_right", "dot_energy",
                                          "lambda", "gamma", "width", "bias", "beta", "mu"};

class Reader {
public:
    Reader(const std::string& text, std::string origin) : origin_(std::move(origin)) {
        std::istringstream in(text);
        try {
            pt::ini_parser::read_ini(in, tree_);
        } catch (const pt::ini_parser_error& e) {
            throw ConfigError(origin_ + ":" + std::to_string(e.line()) + ": " + e.message());
        }
        // key -> line, for messages about values that parse as INI but not as parameters
        std::istringstream lines(text);
        std::string line, section;
        for (int n = 1; std::getline(lines, line); ++n) {
            const std::string t = trim(line);
            if (t.empty() || t[0] == '#' || t[0] == ';') continue;
            if (t[0] == '[') {
                section = trim(t.substr(1, t.find(']') - 1));
                continue;
            }
            const auto eq = t.find('=');
            if (eq != std::string::npos) line_[section + "." + trim(t.substr(0, eq))] = n;
        }
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        const auto it = line_.find(key);
        const std::string where = it == line_.end() ? origin_ : origin_ + ":" + std::to_string(it->second);
        throw ConfigError(where + ": " + key + ": " + what);
    }

    std::optional<std::string> raw(const std::string& key) {
        used_.insert(key);
        const auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
        if (!v) return std::nullopt;
        return trim(*v);
    }

    double number(const std::string& key, const std::string& text) const {
        static const std::regex pi_form(R"(^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|[+-]?)\s*\*?\s*pi(?:\s*/\s*(\d+\.?\d*))?$)");
        std::smatch m;
        if (std::regex_match(text, m, pi_form)) {
            const std::string c = m[1].str();
            const double coeff = c.empty() || c == "+" ? 1.0 : c == "-" ? -1.0 : std::stod(c);
            const double div = m[2].matched ? std::stod(m[2].str()) : 1.0;
            if (div == 0.0) fail(key, "division by zero in '" + text + "'");
            return coeff * kPi / div;
        }
        try {
            std::size_t pos = 0;
            const double v = std::stod(text, &pos);
            if (pos == text.size() && std::isfinite(v)) return v;
        } catch (const std::exception&) {
        }
        fail(key, "expected a number, got '" + text + "'");
    }

    void real(const std::string& key, double& out) {
        if (auto v = raw(key)) out = number(key, *v);
        resolved.emplace_back(key, fmt(out));
    }

    void optional_real(const std::string& key, std::optional<double>& out) {
        if (auto v = raw(key)) out = number(key, *v);
        if (out) resolved.emplace_back(key, fmt(*out));
    }

    void integer(const std::string& key, int& out, int min_value) {
        if (auto v = raw(key)) {
            const double x = number(key, *v);
            if (x != std::floor(x) || x < min_value || x > 1e9)
                fail(key, "expected an integer >= " + std::to_string(min_value) + ", got '" + *v + "'");
            out = static_cast<int>(x);
        }
        resolved.emplace_back(key, std::to_string(out));
    }

    void boolean(const std::string& key, bool& out) {
        if (auto v = raw(key)) {
            if (*v == "true" || *v == "yes" || *v == "1" || *v == "on")
                out = true;
            else if (*v == "false" || *v == "no" || *v == "0" || *v == "off")
                out = false;
            else
                fail(key, "expected true or false, got '" + *v + "'");
        }
        resolved.emplace_back(key, out ? "true" : "false");
    }

    void text(const std::string& key, std::string& out) {
        if (auto v = raw(key)) out = *v;
        resolved.emplace_back(key, out);
    }

    Axis axis(const std::string& key) {
        const auto v = raw(key);
        if (!v) return {};
        std::istringstream in(*v);
        std::string name, a, b, n, extra;
        if (!(in >> name >> a >> b >> n) || (in >> extra)) fail(key, "expected 'name start stop count', got '" + *v + "'");
        if (!kSweepable.count(name)) fail(key, "unknown sweep parameter '" + name + "'");
        Axis ax;
        ax.name = name;
        ax.start = number(key, a);
        ax.stop = number(key, b);
        const double c = number(key, n);
        if (c != std::floor(c) || c < 1) fail(key, "point count must be a positive integer");
        ax.count = static_cast<int>(c);
        resolved.emplace_back(key, name + " " + fmt(ax.start) + " " + fmt(ax.stop) + " " + std::to_string(ax.count));
        return ax;
    }

    void list(const std::string& key, std::vector<double>& out) {
        if (auto v = raw(key)) {
            std::istringstream in(*v);
            out.clear();
            for (std::string w; in >> w;) out.push_back(number(key, w));
        }
        std::string joined;
        for (double x : out) joined += (joined.empty() ? "" : " ") + fmt(x);
        if (!out.empty()) resolved.emplace_back(key, joined);
    }

    void reject_unknown() const {
        for (const auto& [section, body] : tree_) {
            if (body.empty() && !body.data().empty()) fail(section, "key outside of any section");
            for (const auto& [key, value] : body) {
                const std::string full = section + "." + key;
                if (!used_.count(full)) fail(full, "unknown key");
            }
        }
    }

    std::vector<std::pair<std::string, std::string>> resolved;

private:
    std::string origin_;
    pt::ptree tree_;
    std::map<std::string, int> line_;
    std::set<std::string> used_;
};

std::string status_code(const std::string& what) {
    std::string s = what;
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ' ';
    return s;
}

} // namespace

const char* regime_name(Regime r) {
    switch (r) {
    case Regime::Floquet: return "floquet";
    case Regime::Adiabatic: return "adiabatic";
    default: return "oracle";
    }
}

double Physics::coupling() const { return gamma ? std::sqrt(*gamma * width / 2.0) : lambda; }

TQDParams Physics::tqd() const {
    DrivingProtocol d;
    d.frequency = omega;
    d.phase = phase;
    d.phase_sign = phase_sign;
    d.dot_amplitude = dot_amplitude;
    d.amp_left = amp_left;
    d.amp_right = amp_right;
    d.dot_energy = dot_energy;
    return make_tqd(d, coupling(), width, bias);
}

Reservoirs Physics::reservoirs() const { return equal_reservoirs(beta, mu); }

void set_parameter(Physics& p, const std::string& name, double value) {
    if (name == "omega") p.omega = value;
    else if (name == "phase") p.phase = value;
    else if (name == "dot_amplitude") p.dot_amplitude = value;
    else if (name == "amp_left") p.amp_left = value;
    else if (name == "amp_right") p.amp_right = value;
    else if (name == "dot_energy") p.dot_energy = value;
    else if (name == "lambda") {
        p.lambda = value;
        p.gamma.reset();
    } else if (name == "gamma") p.gamma = value;
    else if (name == "width") p.width = value;
    else if (name == "bias") p.bias = value;
    else if (name == "beta") p.beta = value;
    else if (name == "mu") p.mu = value;
    else throw ConfigError("unknown sweep parameter '" + name + "'");
}

double Axis::value(int i) const { return count == 1 ? start : start + (stop - start) * i / (count - 1); }

int Scenario::points() const {
    int n = 1;
    for (const auto& a : axes) n *= a.count;
    return n;
}

Physics Scenario::point(int index, std::array<double, 2>& axis_values) const {
    Physics p = physics;
    axis_values = {std::nan(""), std::nan("")};
    int rest = index;
    for (int k = static_cast<int>(axes.size()) - 1; k >= 0; --k) {
        const int i = rest % axes[k].count;
        rest /= axes[k].count;
        axis_values[k] = axes[k].value(i);
        set_parameter(p, axes[k].name, axis_values[k]);
    }
    return p;
}

Scenario parse_scenario(std::istream& in, const std::string& origin) {
    std::stringstream buf;
    buf << in.rdbuf();
    Reader r(buf.str(), origin);
    Scenario s;

    r.text("scenario.name", s.name);
    r.text("scenario.source", s.source);
    std::string regime = "floquet";
    r.text("scenario.regime", regime);
    if (regime == "floquet") s.regime = Regime::Floquet;
    else if (regime == "adiabatic") s.regime = Regime::Adiabatic;
    else if (regime == "oracle") s.regime = Regime::Oracle;
    else r.fail("scenario.regime", "expected floquet, adiabatic or oracle, got '" + regime + "'");

    Physics& p = s.physics;
    r.real("physics.omega", p.omega);
    r.real("physics.phase", p.phase);
    r.real("physics.phase_sign", p.phase_sign);
    r.real("physics.dot_amplitude", p.dot_amplitude);
    r.real("physics.amp_left", p.amp_left);
    r.real("physics.amp_right", p.amp_right);
    r.real("physics.dot_energy", p.dot_energy);
    r.real("physics.lambda", p.lambda);
    r.optional_real("physics.gamma", p.gamma);
    r.real("physics.width", p.width);
    r.real("physics.bias", p.bias);
    r.real("physics.beta", p.beta);
    r.real("physics.mu", p.mu);

    for (const char* key : {"sweep.axis1", "sweep.axis2"}) {
        Axis a = r.axis(key);
        if (a.name.empty()) continue;
        if (s.axes.size() == 0 && std::string(key) == "sweep.axis2") r.fail(key, "axis2 given without axis1");
        if (!s.axes.empty() && s.axes[0].name == a.name) r.fail(key, "both axes sweep '" + a.name + "'");
        s.axes.push_back(a);
    }

    Numerics& n = s.numerics;
    r.integer("numerics.n_t", n.fme.n_t, 8);
    r.real("numerics.harmonic_tol", n.fme.harmonic_tol);
    r.integer("numerics.max_harmonics", n.fme.liouvillian.max_harmonics, 1);
    r.boolean("numerics.secular", n.fme.liouvillian.secular);
    r.real("numerics.tail_tol", n.fme.tail_tol);
    r.integer("numerics.max_state_harmonics", n.fme.max_state_harmonics, 1);
    r.integer("numerics.state_harmonics", n.fme.fixed_state_harmonics, 0);
    r.boolean("numerics.noise", n.fme.noise);
    r.integer("numerics.noise_grid", n.fme.noise_grid, 8);
    r.real("numerics.noise_tol", n.fme.noise_control.rel_tol);
    r.integer("numerics.channel_grid", n.channel_grid, 16);
    r.real("numerics.adiabatic_threshold", n.adiabatic_threshold);
    r.boolean("numerics.allow_nonadiabatic", n.allow_nonadiabatic);
    r.boolean("numerics.closed_form", n.closed_form);
    r.integer("numerics.cumulant_grid", n.cumulant_grid, 16);
    r.real("numerics.channel_tol", n.channel_tol);
    r.integer("numerics.n_k", n.oracle.n_k, 2);
    r.real("numerics.original_half_width", n.oracle.original_half_width);
    r.real("numerics.residual_half_width", n.oracle.residual_half_width);
    r.integer("numerics.steps_per_period", n.oracle.steps_per_period, 4);
    r.integer("numerics.relaxation_periods", n.oracle.relaxation_periods, 0);
    std::string rep = "mapped";
    r.text("numerics.oracle_representation", rep);
    if (rep == "original") n.oracle_original = true;
    else if (rep != "mapped") r.fail("numerics.oracle_representation", "expected mapped or original, got '" + rep + "'");

    r.text("output.path", s.output);
    r.list("rc.gamma_list", s.gamma_list);
    for (double g : s.gamma_list)
        if (g < 0.0) r.fail("rc.gamma_list", "couplings must be non-negative");
    r.reject_unknown();

    // physical validation on the base point and at every axis end
    const auto check = [&](const Physics& ph, const std::string& where) {
        try {
            if (ph.gamma && *ph.gamma < 0.0) throw std::invalid_argument("gamma must be non-negative");
            if (ph.beta <= 0.0) throw std::invalid_argument("beta must be positive");
            ph.tqd().validate();
        } catch (const std::exception& e) {
            throw ConfigError(origin + ": " + where + ": " + e.what());
        }
    };
    check(p, "physics");
    for (std::size_t k = 0; k < s.axes.size(); ++k)
        for (double v : {s.axes[k].start, s.axes[k].stop}) {
            Physics q = p;
            set_parameter(q, s.axes[k].name, v);
            check(q, "sweep.axis" + std::to_string(k + 1) + " at " + s.axes[k].name + " = " + fmt(v));
        }
    if (n.adiabatic_threshold <= 0.0) r.fail("numerics.adiabatic_threshold", "must be positive");
    if (n.oracle.original_half_width <= 0.0 || n.oracle.residual_half_width <= 0.0)
        r.fail("numerics.residual_half_width", "bath half widths must be positive");

    s.resolved = std::move(r.resolved);
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open");
    return parse_scenario(in, path);
}

Row run_point(const Scenario& s, int index) {
    Row row;
    std::array<double, 2> ax{};
    const auto start = std::chrono::steady_clock::now();
    try {
        const Physics ph = s.point(index, ax);
        row.axis1 = ax[0];
        row.axis2 = ax[1];
        const TQDParams p = ph.tqd();
        const Reservoirs res = ph.reservoirs();
        const Numerics& n = s.numerics;
        switch (s.regime) {
        case Regime::Floquet: {
            const FMEResult r = run_fme(p, res, n.fme);
            row.Q = r.Q;
            if (n.fme.noise) row.dQ2 = r.dQ2;
            row.tail_norm = r.tail_norm;
            row.min_pop = r.min_population;
            break;
        }
        case Regime::Adiabatic: {
            const auto dec = decompose_channels(p, n.channel_grid);
            row.adiab_metric = adiabaticity_metric(dec);
            if (row.adiab_metric > n.adiabatic_threshold && !n.allow_nonadiabatic) {
                row.status = "nonadiabatic";
                break;
            }
            if (n.closed_form) {
                row.Q = row.dQ2 = 0.0;
                double lo = 1.0;
                for (int i = 0; i < 3; ++i) {
                    const auto c = channel_cumulants_closed_form(dec, static_cast<Channel>(i), res, n.cumulant_grid,
                                                                 n.channel_tol);
                    row.Q_channel[i] = c.Q;
                    row.dQ2_channel[i] = c.dQ2;
                    row.Q += c.Q;
                    row.dQ2 += c.dQ2;
                    for (double x : c.occupation) lo = std::min({lo, x, 1.0 - x});
                }
                row.min_pop = lo;
            } else {
                AdiabaticOptions opt;
                opt.threshold = n.adiabatic_threshold;
                opt.allow_nonadiabatic = true;
                opt.n_grid = n.cumulant_grid;
                const auto t = total_cumulants(dec, res, opt);
                row.Q = t.Q;
                row.dQ2 = t.dQ2;
                row.Q_channel = t.Q_channel;
                row.dQ2_channel = t.dQ2_channel;
            }
            break;
        }
        case Regime::Oracle: {
            const OracleRun r = n.oracle_original ? run_oracle(original_model(p, res, n.oracle), n.oracle)
                                                  : run_mapped_oracle(p, res, n.oracle);
            row.Q = r.Q_symmetric;
            row.min_pop = r.min_eigenvalue;
            row.tail_norm = r.conservation_error;
            break;
        }
        }
    } catch (const AdiabaticityError&) {
        row.status = "nonadiabatic";
    } catch (const std::exception& e) {
        row.status = "error: " + status_code(e.what());
    }
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return row;
}

int SweepResult::failures() const {
    int n = 0;
    for (const auto& r : rows) n += r.status != "ok";
    return n;
}

SweepResult run_scenario(const Scenario& s, int threads, bool verbose) {
    SweepResult out;
    const int total = s.points();
    out.rows.resize(total);
    std::atomic<int> next{0}, done{0};
    std::mutex log;
    const auto worker = [&] {
        for (int i; (i = next.fetch_add(1)) < total;) {
            out.rows[i] = run_point(s, i);
            const int d = ++done;
            if (verbose) {
                std::lock_guard lock(log);
                const Row& r = out.rows[i];
                std::fprintf(stderr, "[%d/%d] axis1=%s axis2=%s Q=%s %s (%.0f ms)\n", d, total, fmt(r.axis1).c_str(),
                             fmt(r.axis2).c_str(), fmt(r.Q).c_str(), r.status.c_str(), r.wall_ms);
            }
        }
    };
    const int n = std::max(1, std::min(threads, total));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < n; ++k) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return out;
}

void write_csv(std::ostream& out, const Scenario& s, const SweepResult& r, bool timing) {
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    out << "# rcpump " << RCPUMP_VERSION << "\n";
    out << "# created " << stamp << "\n";
    out << "# regime " << regime_name(s.regime) << "\n";
    out << "# counting: left residual reservoir; Q > 0 means electrons leave the left reservoir\n";
    for (std::size_t k = 0; k < 2; ++k)
        out << "# axis" << k + 1 << " = " << (k < s.axes.size() ? s.axes[k].name : "none") << "\n";
    for (const auto& [key, value] : s.resolved) out << "# " << key << " = " << value << "\n";
    out << kCsvColumns << "\n";
    for (const Row& w : r.rows) {
        out << fmt(w.axis1) << ',' << fmt(w.axis2) << ',' << fmt(w.Q) << ',' << fmt(w.dQ2);
        for (double q : w.Q_channel) out << ',' << fmt(q);
        for (double q : w.dQ2_channel) out << ',' << fmt(q);
        out << ',' << fmt(w.tail_norm) << ',' << fmt(w.min_pop) << ',' << fmt(w.adiab_metric) << ',' << w.status << ','
            << (timing ? fmt(std::round(w.wall_ms * 1000.0) / 1000.0) : "0") << "\n";
    }
}

void write_csv_atomic(const std::string& path, const Scenario& s, const SweepResult& r, bool timing) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        write_csv(out, s, r, timing);
        out.flush();
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, target);
}

int CsvTable::column(const std::string& name) const {
    for (std::size_t k = 0; k < header.size(); ++k)
        if (header[k] == name) return static_cast<int>(k);
    return -1;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open");
    return read_csv(in, path);
}

CsvTable read_csv(std::istream& in, const std::string& path) {
    CsvTable t;
    std::string line;
    const auto split = [](const std::string& l) {
        std::vector<std::string> f;
        std::stringstream ss(l);
        for (std::string x; std::getline(ss, x, ',');) f.push_back(trim(x));
        return f;
    };
    for (int n = 1; std::getline(in, line); ++n) {
        if (trim(line).empty() || line[0] == '#') continue;
        auto f = split(line);
        if (t.header.empty()) {
            t.header = std::move(f);
        } else {
            if (f.size() != t.header.size())
                throw ConfigError(path + ":" + std::to_string(n) + ": expected " + std::to_string(t.header.size()) +
                                  " fields, got " + std::to_string(f.size()));
            t.rows.push_back(std::move(f));
        }
    }
    if (t.header.empty()) throw ConfigError(path + ": no column header");
    return t;
}

Comparison compare_tables(const CsvTable& a, const CsvTable& b, const std::string& column) {
    const int ca = a.column(column), cb = b.column(column);
    if (ca < 0 || cb < 0) throw ConfigError("column '" + column + "' missing");
    const int a1 = a.column("axis1"), a2 = a.column("axis2"), b1 = b.column("axis1"), b2 = b.column("axis2");
    if (a1 < 0 || a2 < 0 || b1 < 0 || b2 < 0) throw ConfigError("axis columns missing");
    if (a.rows.size() != b.rows.size())
        throw ConfigError("axis mismatch: " + std::to_string(a.rows.size()) + " vs " + std::to_string(b.rows.size()) +
                          " points");
    const auto num = [](const std::string& s) { return s == "nan" ? std::nan("") : std::stod(s); };
    const auto same = [](double x, double y) {
        return (std::isnan(x) && std::isnan(y)) || std::abs(x - y) <= 1e-9 * std::max(1.0, std::abs(x));
    };
    Comparison c;
    c.column = column;
    double sum = 0.0;
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        PointDifference d;
        d.axis1 = num(a.rows[i][a1]);
        d.axis2 = num(a.rows[i][a2]);
        if (!same(d.axis1, num(b.rows[i][b1])) || !same(d.axis2, num(b.rows[i][b2])))
            throw ConfigError("axis mismatch at row " + std::to_string(i + 1));
        d.a = num(a.rows[i][ca]);
        d.b = num(b.rows[i][cb]);
        d.absolute = std::abs(d.a - d.b);
        const double scale = std::max(std::abs(d.a), std::abs(d.b));
        d.relative = scale > 0.0 ? d.absolute / scale : 0.0;
        if (std::isnan(d.a) && std::isnan(d.b)) d.absolute = d.relative = 0.0;
        c.points.push_back(d);
        if (std::isnan(d.absolute)) {
            ++c.missing;
            continue;
        }
        c.max_absolute = std::max(c.max_absolute, d.absolute);
        c.max_relative = std::max(c.max_relative, d.relative);
        sum += d.relative;
    }
    const int counted = static_cast<int>(c.points.size()) - c.missing;
    c.mean_relative = counted > 0 ? sum / counted : 0.0;
    return c;
}

} // namespace rcpump
