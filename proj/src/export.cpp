#include "trapant/export.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "trapant/errors.hpp"

namespace trapant::io {

namespace {

std::string g9(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void comments(std::ostream& out, const FileHeader& h, const char* prefix) {
    for (const auto& l : h.lines()) out << prefix << ' ' << l << '\n';
}

double db(double mag) { return 20.0 * std::log10(mag); }

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) out.push_back(cell);
    return out;
}

double parse_double(const std::string& s, int line) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) throw ValidationError("line " + std::to_string(line) + ": bad number '" + s + "'");
    return v;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<std::string> FileHeader::lines() const {
    std::vector<std::string> out{std::string("trapant ") + tool_version};
    if (!config_hash.empty()) out.push_back("config " + config_hash);
    out.insert(out.end(), extra.begin(), extra.end());
    return out;
}

void write_trap_csv(std::ostream& out, const FileHeader& header, std::span<const circuit::TrapSweepPoint> rows) {
    comments(out, header, "#");
    out << "freq_hz,corner,s21_re,s21_im,s21_db,s11_re,s11_im\n";
    for (const auto& r : rows)
        out << g9(r.f) << ',' << r.corner.name() << ',' << g9(r.s.s21.real()) << ',' << g9(r.s.s21.imag()) << ','
            << g9(db(std::abs(r.s.s21))) << ',' << g9(r.s.s11.real()) << ',' << g9(r.s.s11.imag()) << '\n';
}

void write_sweep_csv(std::ostream& out, const FileHeader& header, std::span<const SweepSeries> series) {
    comments(out, header, "#");
    out << "freq_hz,corner,zin_re,zin_im,s11_re,s11_im,rl_db\n";
    for (const auto& s : series)
        for (const auto& r : s.results)
            out << g9(r.f) << ',' << s.corner << ',' << g9(r.z_in.real()) << ',' << g9(r.z_in.imag()) << ','
                << g9(r.s11.real()) << ',' << g9(r.s11.imag()) << ',' << g9(r.rl_db()) << '\n';
}

std::vector<SweepRow> read_sweep_csv(std::istream& in) {
    std::vector<SweepRow> rows;
    std::string line;
    int n = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line != "freq_hz,corner,zin_re,zin_im,s11_re,s11_im,rl_db")
                throw ValidationError("line " + std::to_string(n) + ": unexpected sweep CSV header");
            header = true;
            continue;
        }
        const auto cells = split_csv(line);
        if (cells.size() != 7) throw ValidationError("line " + std::to_string(n) + ": expected 7 columns");
        SweepRow r;
        r.f = parse_double(cells[0], n);
        r.corner = cells[1];
        r.z_in = {parse_double(cells[2], n), parse_double(cells[3], n)};
        r.s11 = {parse_double(cells[4], n), parse_double(cells[5], n)};
        r.rl_db = parse_double(cells[6], n);
        rows.push_back(r);
    }
    if (!header) throw ValidationError("sweep CSV has no header");
    return rows;
}

void write_touchstone(std::ostream& out, const FileHeader& header, std::span<const solver::DriveResult> results,
                      double z0) {
    comments(out, header, "!");
    out << "# HZ S RI R " << g9(z0) << '\n';
    for (const auto& r : results) out << g9(r.f) << ' ' << g9(r.s11.real()) << ' ' << g9(r.s11.imag()) << '\n';
}

Touchstone read_touchstone(std::istream& in) {
    Touchstone t;
    double unit = 1e9;  // Touchstone default is GHz
    std::string format = "MA";
    bool option_seen = false;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (const auto bang = line.find('!'); bang != std::string::npos) line.erase(bang);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        if (first == "#") {
            if (option_seen) throw ValidationError("line " + std::to_string(n) + ": second option line");
            option_seen = true;
            std::string tok;
            while (ls >> tok) {
                for (auto& c : tok) c = char(std::toupper(static_cast<unsigned char>(c)));
                if (tok == "HZ") unit = 1.0;
                else if (tok == "KHZ") unit = 1e3;
                else if (tok == "MHZ") unit = 1e6;
                else if (tok == "GHZ") unit = 1e9;
                else if (tok == "RI" || tok == "MA" || tok == "DB") format = tok;
                else if (tok == "S") continue;
                else if (tok == "R") {
                    if (!(ls >> t.z0)) throw ValidationError("line " + std::to_string(n) + ": missing reference");
                } else {
                    throw ValidationError("line " + std::to_string(n) + ": unsupported option '" + tok + "'");
                }
            }
            continue;
        }
        double a = 0.0, b = 0.0;
        std::string rest;
        if (!(ls >> a >> b) || (ls >> rest))
            throw ValidationError("line " + std::to_string(n) + ": expected 'freq re im' for a one-port file");
        const double f = parse_double(first, n) * unit;
        cplx s;
        if (format == "RI") s = {a, b};
        else if (format == "MA") s = std::polar(a, b * pi / 180.0);
        else s = std::polar(std::pow(10.0, a / 20.0), b * pi / 180.0);
        t.f.push_back(f);
        t.s11.push_back(s);
    }
    return t;
}

void write_pattern_csv(std::ostream& out, const FileHeader& header, const farfield::FarFieldGrid& grid,
                       const farfield::GainSummary& gain) {
    comments(out, header, "#");
    out << "theta_deg,phi_deg,U_w_per_sr,D_dBi,G_dBi\n";
    const std::size_t np = grid.phi.size();
    auto dbi = [](double v) { return v > 0.0 ? g9(10.0 * std::log10(v)) : std::string("-inf"); };
    for (std::size_t it = 0; it < grid.theta.size(); ++it)
        for (std::size_t ip = 0; ip < np; ++ip) {
            const std::size_t k = it * np + ip;
            out << g9(grid.theta[it] * 180.0 / pi) << ',' << g9(grid.phi[ip] * 180.0 / pi) << ','
                << g9(grid.intensity[k]) << ',' << dbi(gain.directivity[k]) << ',' << dbi(gain.gain[k]) << '\n';
        }
}

std::string pattern_summary_json(double f, const farfield::GainSummary& gain, double p_in, double p_rad,
                                 double azimuth_spread_db) {
    nlohmann::ordered_json j;
    j["freq_hz"] = f;
    j["p_in_w"] = p_in;
    j["p_rad_w"] = p_rad;
    j["max_directivity_dbi"] = gain.max_directivity_dbi();
    j["max_gain_dbi"] = gain.max_gain_dbi();
    j["theta_at_max_deg"] = gain.theta_at_max * 180.0 / pi;
    j["phi_at_max_deg"] = gain.phi_at_max * 180.0 / pi;
    j["efficiency"] = gain.efficiency;
    j["efficiency_db"] = gain.efficiency_db();
    j["azimuth_spread_db"] = std::isfinite(azimuth_spread_db) ? nlohmann::ordered_json(azimuth_spread_db)
                                                              : nlohmann::ordered_json(nullptr);
    return j.dump(2) + "\n";
}

}  // namespace trapant::io
