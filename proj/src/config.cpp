#include "lambda_beam/config.hpp"

#include "lambda_beam/constants.hpp"
#include "lambda_beam/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fmt/core.h>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace lambda_beam {

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_number(std::string_view text, std::string_view field)
{
    double value = 0.0;
    const auto* begin = text.data();
    const auto* end = text.data() + text.size();
    if (!text.empty() && *begin == '+')
        ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw ConfigError(fmt::format("{}: cannot parse '{}' as a number", field, text));
    return value;
}

int parse_int(std::string_view text, std::string_view field)
{
    int value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw ConfigError(fmt::format("{}: cannot parse '{}' as an integer", field, text));
    return value;
}

bool parse_bool(std::string_view text, std::string_view field)
{
    if (text == "true" || text == "yes" || text == "1")
        return true;
    if (text == "false" || text == "no" || text == "0")
        return false;
    throw ConfigError(fmt::format("{}: expected true/false, got '{}'", field, text));
}

std::string fmt_double(double v) { return fmt::format("{:.17g}", v); }

void check_derived(double stored, double computed, std::string_view field)
{
    const double scale = std::max(std::abs(stored), std::abs(computed));
    if (std::abs(stored - computed) > 1e-12 * scale)
        throw ConfigError(fmt::format(
            "{}: stored value {} disagrees with recomputed {} (derived fields are not free)",
            field, fmt_double(stored), fmt_double(computed)));
}

enum class Kind { length, rate, angular, plain, integer, boolean };

}  // namespace

const std::vector<IniEntry>* IniDocument::section(const std::string& name) const
{
    const auto it = sections.find(name);
    return it == sections.end() ? nullptr : &it->second;
}

IniDocument parse_ini(std::string_view text)
{
    IniDocument doc;
    std::string current;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto next = text.find('\n', pos);
        if (next == std::string_view::npos)
            next = text.size();
        std::string_view line = text.substr(pos, next - pos);
        pos = next + 1;
        ++line_no;

        if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(fmt::format("line {}: malformed section header", line_no));
            current = std::string(trim(line.substr(1, line.size() - 2)));
            if (doc.sections.contains(current))
                throw ConfigError(fmt::format("line {}: duplicate section [{}]", line_no, current));
            doc.sections[current];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(fmt::format("line {}: expected 'key = value'", line_no));
        if (current.empty())
            throw ConfigError(fmt::format("line {}: key outside of any section", line_no));
        IniEntry entry{std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))),
                       line_no};
        auto& entries = doc.sections[current];
        if (std::any_of(entries.begin(), entries.end(),
                        [&](const IniEntry& e) { return e.key == entry.key; }))
            throw ConfigError(
                fmt::format("line {}: duplicate key {}.{}", line_no, current, entry.key));
        entries.push_back(std::move(entry));
    }
    return doc;
}

double parse_quantity(std::string_view text, double gamma31, bool allow_g31, std::string_view field)
{
    text = trim(text);
    const auto space = text.find_first_of(" \t");
    if (space == std::string_view::npos)
        return parse_number(text, field);
    const double number = parse_number(trim(text.substr(0, space)), field);
    const std::string_view suffix = trim(text.substr(space));
    if (suffix == "Hz2pi")
        return number * constants::two_pi;
    if (suffix == "G31") {
        if (!allow_g31)
            throw ConfigError(fmt::format("{}: the G31 suffix only applies to rates", field));
        return number * gamma31;
    }
    throw ConfigError(fmt::format("{}: unknown unit suffix '{}'", field, suffix));
}

ParameterSet parameters_from(const IniDocument& doc, std::span<const std::string> extra_sections)
{
    static const std::set<std::string> known = {"atom", "vapor", "drive", "beam", "grid", "run"};
    for (const auto& [name, entries] : doc.sections) {
        if (!known.contains(name) &&
            std::find(extra_sections.begin(), extra_sections.end(), name) == extra_sections.end())
            throw ConfigError(fmt::format("unknown section [{}]", name));
    }

    ParameterSet p = default_rb87_d1();

    auto lookup = [&](const std::string& section, const std::string& key) -> const IniEntry* {
        const auto* entries = doc.section(section);
        if (!entries)
            return nullptr;
        for (const auto& e : *entries)
            if (e.key == key)
                return &e;
        return nullptr;
    };

    // Gamma31 first: the G31 suffix of every other rate refers to it.
    if (const auto* e = lookup("atom", "Gamma31"))
        p.atom.gamma31 = parse_quantity(e->value, 0.0, false, "atom.Gamma31");
    const double g31 = p.atom.gamma31;

    struct Field {
        Kind kind;
        std::function<void(double)> set_number;
        std::function<void(const std::string&)> set_text = {};
    };
    std::map<std::string, std::map<std::string, Field>> fields;

    std::optional<double> stored_gamma3, stored_gamma4, stored_delta, stored_zr;
    std::optional<double> temperature, v_th;
    bool delta_optimal = false;
    std::optional<double> delta_p;
    std::optional<double> delta_numeric;

    fields["atom"] = {
        {"lambda_p", {Kind::length, [&](double v) { p.atom.lambda_p = v; }}},
        {"Gamma31", {Kind::rate, [&](double) {}}},
        {"Gamma32", {Kind::rate, [&](double v) { p.atom.gamma32 = v; }}},
        {"Gamma41", {Kind::rate, [&](double v) { p.atom.gamma41 = v; }}},
        {"Gamma42", {Kind::rate, [&](double v) { p.atom.gamma42 = v; }}},
        {"gamma21", {Kind::rate, [&](double v) { p.atom.gamma21 = v; }}},
        {"Gamma3", {Kind::rate, [&](double v) { stored_gamma3 = v; }}},
        {"Gamma4", {Kind::rate, [&](double v) { stored_gamma4 = v; }}},
    };
    fields["vapor"] = {
        {"T", {Kind::plain, [&](double v) { temperature = v; }}},
        {"v_th", {Kind::plain, [&](double v) { v_th = v; }}},
        {"mass", {Kind::plain, [&](double v) { p.vapor.mass = v; }}},
        {"gamma_c", {Kind::rate, [&](double v) { p.vapor.gamma_c = v; }}},
        {"n0", {Kind::plain, [&](double v) { p.vapor.n0 = v; }}},
        {"delta_k", {Kind::angular, [&](double v) { p.vapor.delta_k = v; }}},
    };
    fields["drive"] = {
        {"omega_c", {Kind::rate, [&](double v) { p.drive.omega_c = v; }}},
        {"pump_p", {Kind::rate, [&](double v) { p.drive.pump_p = v; }}},
        {"delta_c", {Kind::rate, [&](double v) { p.drive.delta_c = v; }}},
        {"delta_p", {Kind::rate, [&](double v) { delta_p = v; }}},
        {"delta",
         {Kind::rate, [&](double v) { delta_numeric = v; },
          [&](const std::string& s) { delta_optimal = (s == "optimal"); }}},
    };
    fields["beam"] = {
        {"w_p", {Kind::length, [&](double v) { p.beam.w_p = v; }}},
        {"omega_p0", {Kind::rate, [&](double v) { p.beam.omega_p0 = v; }}},
        {"z_R", {Kind::length, [&](double v) { stored_zr = v; }}},
    };
    fields["grid"] = {
        {"n", {Kind::integer, [&](double v) { p.grid.n = static_cast<int>(v); }}},
        {"window_over_wp", {Kind::plain, [&](double v) { p.grid.window_over_wp = v; }}},
    };
    fields["run"] = {
        {"z_end_over_zR", {Kind::plain, [&](double v) { p.run.z_end_over_zr = v; }}},
        {"samples", {Kind::integer, [&](double v) { p.run.samples = static_cast<int>(v); }}},
        {"complex_k31", {Kind::boolean, [&](double v) { p.run.complex_k31 = v != 0.0; }}},
        {"retune_delta", {Kind::boolean, [&](double v) { p.run.retune_delta = v != 0.0; }}},
        {"kerr_chi3", {Kind::plain, [&](double v) { p.run.kerr_chi3 = v; }}},
        {"kerr_steps", {Kind::integer, [&](double v) { p.run.kerr_steps = static_cast<int>(v); }}},
    };

    for (const auto& [section, entries] : doc.sections) {
        const auto table = fields.find(section);
        if (table == fields.end())
            continue;  // an accepted extra section
        for (const auto& e : entries) {
            const std::string name = section + "." + e.key;
            const auto f = table->second.find(e.key);
            if (f == table->second.end())
                throw ConfigError(fmt::format("line {}: unknown key {}", e.line, name));
            const Field& field = f->second;
            if (field.set_text && e.value == "optimal") {
                field.set_text(e.value);
                continue;
            }
            switch (field.kind) {
            case Kind::integer: field.set_number(parse_int(e.value, name)); break;
            case Kind::boolean: field.set_number(parse_bool(e.value, name) ? 1.0 : 0.0); break;
            case Kind::rate: field.set_number(parse_quantity(e.value, g31, true, name)); break;
            case Kind::angular: field.set_number(parse_quantity(e.value, g31, false, name)); break;
            case Kind::length:
            case Kind::plain: field.set_number(parse_number(trim(e.value), name)); break;
            }
        }
    }

    if (temperature && v_th) {
        p.vapor.temperature = temperature;
        p.vapor.v_th = *v_th;
    } else if (temperature) {
        p.vapor.temperature = temperature;
        p.vapor.v_th = thermal_speed(*temperature, p.vapor.mass);
    } else if (v_th) {
        p.vapor.temperature.reset();
        p.vapor.v_th = *v_th;
    }

    if (delta_optimal) {
        p.run.detuning = DetuningMode::optimal;
        if (delta_p)
            p.drive.delta_p = *delta_p;
    } else if (delta_p || delta_numeric) {
        p.run.detuning = DetuningMode::fixed;
        if (delta_p) {
            p.drive.delta_p = *delta_p;
            if (delta_numeric)
                check_derived(*delta_numeric, p.drive.delta(), "drive.delta");
        } else {
            p.drive = p.drive.with_two_photon_detuning(*delta_numeric);
        }
    }

    if (stored_gamma3)
        check_derived(*stored_gamma3, p.atom.gamma3(), "atom.Gamma3");
    if (stored_gamma4)
        check_derived(*stored_gamma4, p.atom.gamma4(), "atom.Gamma4");
    if (stored_zr)
        check_derived(*stored_zr, p.beam.rayleigh_length(p.atom.lambda_p), "beam.z_R");

    check(p);
    return p;
}

ParameterSet parse_config(std::string_view text) { return parameters_from(parse_ini(text)); }

std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ParameterSet load_config(const std::filesystem::path& path)
{
    return parse_config(read_text_file(path));
}

std::string serialize_config(const ParameterSet& p)
{
    std::string out;
    auto kv = [&](std::string_view key, const std::string& value) {
        out += fmt::format("{} = {}\n", key, value);
    };
    out += "[atom]\n";
    kv("lambda_p", fmt_double(p.atom.lambda_p));
    kv("Gamma31", fmt_double(p.atom.gamma31));
    kv("Gamma32", fmt_double(p.atom.gamma32));
    kv("Gamma41", fmt_double(p.atom.gamma41));
    kv("Gamma42", fmt_double(p.atom.gamma42));
    kv("gamma21", fmt_double(p.atom.gamma21));
    kv("Gamma3", fmt_double(p.atom.gamma3()));
    kv("Gamma4", fmt_double(p.atom.gamma4()));

    out += "\n[vapor]\n";
    if (p.vapor.temperature)
        kv("T", fmt_double(*p.vapor.temperature));
    kv("v_th", fmt_double(p.vapor.v_th));
    kv("mass", fmt_double(p.vapor.mass));
    kv("gamma_c", fmt_double(p.vapor.gamma_c));
    kv("n0", fmt_double(p.vapor.n0));
    kv("delta_k", fmt_double(p.vapor.delta_k));

    out += "\n[drive]\n";
    kv("omega_c", fmt_double(p.drive.omega_c));
    kv("pump_p", fmt_double(p.drive.pump_p));
    kv("delta_c", fmt_double(p.drive.delta_c));
    kv("delta_p", fmt_double(p.drive.delta_p));
    kv("delta", p.run.detuning == DetuningMode::optimal ? std::string("optimal")
                                                        : fmt_double(p.drive.delta()));

    out += "\n[beam]\n";
    kv("w_p", fmt_double(p.beam.w_p));
    kv("omega_p0", fmt_double(p.beam.omega_p0));
    kv("z_R", fmt_double(p.beam.rayleigh_length(p.atom.lambda_p)));

    out += "\n[grid]\n";
    kv("n", std::to_string(p.grid.n));
    kv("window_over_wp", fmt_double(p.grid.window_over_wp));

    out += "\n[run]\n";
    kv("z_end_over_zR", fmt_double(p.run.z_end_over_zr));
    kv("samples", std::to_string(p.run.samples));
    kv("complex_k31", p.run.complex_k31 ? "true" : "false");
    kv("retune_delta", p.run.retune_delta ? "true" : "false");
    kv("kerr_chi3", fmt_double(p.run.kerr_chi3));
    kv("kerr_steps", std::to_string(p.run.kerr_steps));
    return out;
}

}  // namespace lambda_beam
