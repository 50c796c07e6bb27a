#include "flyinv/errors.hpp"
#include "flyinv/experiments.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

namespace flyinv {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> items;
    while (true) {
        const auto comma = s.find(',');
        items.push_back(trim(s.substr(0, comma)));
        if (comma == std::string_view::npos) {
            break;
        }
        s.remove_prefix(comma + 1);
    }
    return items;
}

std::string format_number(double v) {
    // Shortest text that parses back to the same double.
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <typename T>
std::string join(const std::vector<T>& items, const std::function<std::string(const T&)>& fmt) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += fmt(items[i]);
    }
    return out;
}

bool parse_bool(std::string_view text) {
    if (text == "true") {
        return true;
    }
    if (text == "false") {
        return false;
    }
    throw ConfigError("expected true or false, got '" + std::string(text) + "'");
}

int parse_int(std::string_view text) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ConfigError("expected an integer, got '" + std::string(text) + "'");
    }
    return value;
}

struct Field {
    std::string_view section;
    std::string_view key;
    std::function<void(Scenario&, std::string_view)> set;
    std::function<std::string(const Scenario&)> get;
};

Field scalar(std::string_view section, std::string_view key, double& (*ref)(Scenario&)) {
    return {section, key,
            [ref](Scenario& s, std::string_view v) { ref(s) = parse_quantity(v); },
            [ref](const Scenario& s) {
                Scenario copy = s;
                return format_number(ref(copy));
            }};
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        f.push_back(scalar("source", "v_dc", [](Scenario& s) -> double& { return s.sim.flyback.v_dc; }));
        f.push_back(scalar("transformer", "l_m", [](Scenario& s) -> double& { return s.sim.flyback.l_m; }));
        f.push_back(scalar("transformer", "n", [](Scenario& s) -> double& { return s.sim.flyback.n; }));
        f.push_back(scalar("transformer", "r1", [](Scenario& s) -> double& { return s.sim.flyback.r1; }));
        f.push_back(scalar("transformer", "r2", [](Scenario& s) -> double& { return s.sim.flyback.r2; }));
        f.push_back(scalar("transformer", "v_d", [](Scenario& s) -> double& { return s.sim.flyback.v_d; }));
        f.push_back(scalar("switches", "r_on", [](Scenario& s) -> double& { return s.sim.flyback.r_on; }));
        f.push_back(scalar("modulator", "f_sw", [](Scenario& s) -> double& { return s.sim.modulator.f_sw; }));
        f.push_back(scalar("modulator", "f0", [](Scenario& s) -> double& { return s.sim.modulator.f0; }));
        f.push_back(scalar("modulator", "d_max", [](Scenario& s) -> double& { return s.sim.modulator.d_max; }));
        f.push_back(scalar("filter.cl", "l", [](Scenario& s) -> double& { return s.sim.filter.cl.l; }));
        f.push_back(scalar("filter.cl", "c", [](Scenario& s) -> double& { return s.sim.filter.cl.c; }));
        f.push_back(scalar("filter.cl", "r_series", [](Scenario& s) -> double& { return s.sim.filter.cl.r_series; }));
        f.push_back(scalar("filter.lcl", "l_i", [](Scenario& s) -> double& { return s.sim.filter.lcl.l_i; }));
        f.push_back(scalar("filter.lcl", "l_g", [](Scenario& s) -> double& { return s.sim.filter.lcl.l_g; }));
        f.push_back(scalar("filter.lcl", "c_f", [](Scenario& s) -> double& { return s.sim.filter.lcl.c_f; }));
        f.push_back(scalar("filter.lcl", "c_s", [](Scenario& s) -> double& { return s.sim.filter.lcl.c_s; }));
        f.push_back(scalar("filter.lcl", "r_series", [](Scenario& s) -> double& { return s.sim.filter.lcl.r_series; }));
        f.push_back(scalar("grid", "v_g_amp", [](Scenario& s) -> double& { return s.sim.grid.v_g_amp; }));
        f.push_back(scalar("grid", "f0", [](Scenario& s) -> double& { return s.sim.grid.f0; }));
        f.push_back(scalar("sim", "dt", [](Scenario& s) -> double& { return s.sim.dt; }));
        f.push_back(scalar("sim", "t_settle", [](Scenario& s) -> double& { return s.sim.t_settle; }));
        f.push_back(scalar("sim", "t_capture", [](Scenario& s) -> double& { return s.sim.t_capture; }));
        f.push_back({"sim", "h_max",
                     [](Scenario& s, std::string_view v) { s.h_max = parse_int(v); },
                     [](const Scenario& s) { return std::to_string(s.h_max); }});
        f.push_back({"sweep", "r1",
                     [](Scenario& s, std::string_view v) {
                         s.sweep_r1.clear();
                         for (auto item : split_list(v)) {
                             s.sweep_r1.push_back(parse_quantity(item));
                         }
                     },
                     [](const Scenario& s) {
                         return join<double>(s.sweep_r1, [](const double& x) { return format_number(x); });
                     }});
        f.push_back({"sweep", "power",
                     [](Scenario& s, std::string_view v) {
                         s.sweep_power.clear();
                         for (auto item : split_list(v)) {
                             s.sweep_power.push_back(parse_quantity(item));
                         }
                     },
                     [](const Scenario& s) {
                         return join<double>(s.sweep_power, [](const double& x) { return format_number(x); });
                     }});
        f.push_back({"sweep", "filters",
                     [](Scenario& s, std::string_view v) {
                         s.filters.clear();
                         for (auto item : split_list(v)) {
                             s.filters.push_back(parse_filter_kind(item));
                         }
                     },
                     [](const Scenario& s) {
                         return join<FilterKind>(s.filters, [](const FilterKind& k) {
                             return k == FilterKind::CL ? std::string("cl") : std::string("lcl");
                         });
                     }});
        f.push_back({"sweep", "strict",
                     [](Scenario& s, std::string_view v) { s.strict = parse_bool(v); },
                     [](const Scenario& s) { return std::string(s.strict ? "true" : "false"); }});
        return f;
    }();
    return table;
}

const Field* find_field(std::string_view section, std::string_view key) {
    for (const auto& f : fields()) {
        if (f.section == section && f.key == key) {
            return &f;
        }
    }
    return nullptr;
}

}  // namespace

double parse_quantity(std::string_view text) {
    text = trim(text);
    if (text.empty()) {
        throw ConfigError("empty value");
    }
    double scale = 1.0;
    switch (text.back()) {
        case 'k': scale = 1e3; break;
        case 'm': scale = 1e-3; break;
        case 'u': scale = 1e-6; break;
        case 'n': scale = 1e-9; break;
        default: break;
    }
    std::string_view digits = scale == 1.0 ? text : text.substr(0, text.size() - 1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || digits.empty() ||
        !std::isfinite(value)) {
        throw ConfigError("not a number: '" + std::string(text) + "'");
    }
    return value * scale;
}

void Scenario::validate() const {
    sim.validate();
    auto positive_list = [](const std::vector<double>& v, const char* name) {
        if (v.empty()) {
            throw ConfigError(std::string("sweep ") + name + " must not be empty");
        }
        for (double x : v) {
            if (!(x > 0.0)) {
                throw ConfigError(std::string("sweep ") + name + " values must be > 0");
            }
        }
    };
    positive_list(sweep_r1, "r1");
    positive_list(sweep_power, "power");
    if (filters.empty()) {
        throw ConfigError("sweep filters must not be empty");
    }
    if (h_max < 2) {
        throw ConfigError("h_max must be >= 2");
    }
    if (static_cast<double>(h_max) * sim.grid.f0 >= 0.5 / sim.dt) {
        throw ConfigError("h_max lies above the Nyquist frequency of dt");
    }
}

Scenario parse_config(std::string_view text) {
    Scenario scn;
    std::string section;
    std::vector<std::string> unknown;
    std::optional<double> f0_modulator;
    std::optional<double> f0_grid;
    int lineno = 0;

    while (!text.empty()) {
        ++lineno;
        const auto eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);

        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw ConfigError("malformed section header", lineno);
            }
            section = std::string(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("expected 'key = value'", lineno);
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("missing key before '='", lineno);
        }
        if (section.empty()) {
            throw ConfigError("key '" + std::string(key) + "' outside any section", lineno);
        }
        const Field* field = find_field(section, key);
        if (field == nullptr) {
            unknown.push_back("[" + section + "] " + std::string(key));
            continue;
        }
        try {
            field->set(scn, value);
        } catch (const ConfigError& e) {
            throw ConfigError(std::string(key) + ": " + e.what(), lineno);
        }
        if (key == "f0" && section == "grid") {
            f0_grid = scn.sim.grid.f0;
        } else if (key == "f0") {
            f0_modulator = scn.sim.modulator.f0;
        }
    }
    if (!unknown.empty()) {
        std::string msg = "unknown keys:";
        for (const auto& u : unknown) {
            msg += " " + u + ";";
        }
        msg.pop_back();
        throw ConfigError(msg);
    }
    if (f0_grid && f0_modulator && *f0_grid != *f0_modulator) {
        throw ConfigError("[modulator] f0 and [grid] f0 disagree");
    }
    const double f0 = f0_grid.value_or(f0_modulator.value_or(scn.sim.grid.f0));
    scn.sim.grid.f0 = f0;
    scn.sim.modulator.f0 = f0;
    scn.validate();
    return scn;
}

Scenario load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read config " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize(const Scenario& scn) {
    std::string out;
    std::string_view section;
    for (const auto& f : fields()) {
        if (f.section != section) {
            if (!section.empty()) {
                out += "\n";
            }
            section = f.section;
            out += "[" + std::string(section) + "]\n";
        }
        out += std::string(f.key) + " = " + f.get(scn) + "\n";
    }
    return out;
}

}  // namespace flyinv
