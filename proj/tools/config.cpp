#include "config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace singspec::cli {

namespace {

double parse_real(const std::string& s) {
    if (s.empty()) throw validation_error("empty number");
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) throw validation_error("not a number: '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != ' ') {
            cur += c;
        }
    }
    out.push_back(cur);
    if (out.size() == 1 && out[0].empty()) throw validation_error("empty list");
    return out;
}

double number(const json& j, const char* key) {
    if (!j.contains(key)) throw validation_error(std::string("config: missing field '") + key + "'");
    if (!j.at(key).is_number()) throw validation_error(std::string("config: field '") + key + "' must be a number");
    return j.at(key).get<double>();
}

} // namespace

cplx parse_complex(const std::string& in) {
    std::string s;
    for (char c : in)
        if (c != ' ') s += c;
    if (s.empty()) throw validation_error("empty complex number");
    if (s.back() != 'i') return parse_real(s);
    s.pop_back();
    // Split at the last sign that is not an exponent sign or the leading one.
    std::size_t cut = std::string::npos;
    for (std::size_t i = s.size(); i-- > 1;)
        if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
            cut = i;
            break;
        }
    auto imag = [](const std::string& t) {
        if (t.empty() || t == "+") return 1.0;
        if (t == "-") return -1.0;
        return parse_real(t);
    };
    if (cut == std::string::npos) return {0.0, imag(s)};
    return {parse_real(s.substr(0, cut)), imag(s.substr(cut))};
}

std::vector<double> parse_reals(const std::string& s) {
    std::vector<double> v;
    for (auto& t : split(s)) v.push_back(parse_real(t));
    return v;
}

std::vector<int> parse_ints(const std::string& s) {
    std::vector<int> v;
    for (auto& t : split(s)) {
        const double x = parse_real(t);
        if (x != static_cast<int>(x)) throw validation_error("not an integer: '" + t + "'");
        v.push_back(static_cast<int>(x));
    }
    return v;
}

std::vector<cplx> parse_complexes(const std::string& s) {
    std::vector<cplx> v;
    for (auto& t : split(s)) v.push_back(parse_complex(t));
    return v;
}

cplx complex_from_json(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    if (j.is_string()) return parse_complex(j.get<std::string>());
    throw validation_error("config: complex value must be a number, [re, im] or a string");
}

json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

json read_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw validation_error("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    try {
        return json::parse(ss.str());
    } catch (const json::exception& e) {
        throw validation_error(path + ": " + e.what());
    }
}

elliptic_lattice lattice_from_json(const json& j) {
    if (j.is_string()) return lattice_from_json(read_json_file(j.get<std::string>()));
    if (!j.is_object()) throw validation_error("config: lattice must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "omega_re" && it.key() != "omega_im" && it.key() != "omega2_re" && it.key() != "omega2_im")
            throw validation_error("config: unknown lattice field '" + it.key() + "'");
    return lattice_from_half_periods(cplx(number(j, "omega_re"), number(j, "omega_im")),
                                     cplx(number(j, "omega2_re"), number(j, "omega2_im")));
}

json lattice_to_json(const elliptic_lattice& L) {
    return {{"omega_re", L.omega().real()},
            {"omega_im", L.omega().imag()},
            {"omega2_re", L.omega_prime().real()},
            {"omega2_im", L.omega_prime().imag()}};
}

potential potential_from_json(const json& j) {
    if (!j.is_object()) throw validation_error("config: potential must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& k = it.key();
        if (k != "variant" && k != "n" && k != "k" && k != "lattice" && k != "shift" && k != "period" &&
            k != "coefficients")
            throw validation_error("config: unknown potential field '" + k + "'");
    }
    if (!j.contains("variant") || !j.at("variant").is_string())
        throw validation_error("config: potential needs a string 'variant'");
    const std::string v = j.at("variant").get<std::string>();
    auto n = [&]() {
        const double x = number(j, "n");
        if (x != static_cast<int>(x)) throw validation_error("config: n must be an integer");
        return static_cast<int>(x);
    };
    if (v == "zero") return potential::zero();
    if (v == "rational") return potential::rational(n());
    if (v == "trig") return potential::trig(n(), number(j, "k"));
    if (v == "sinh") return potential::sinh_soliton(n(), number(j, "k"));
    if (v == "lame") {
        if (!j.contains("lattice")) throw validation_error("config: lame potential needs a lattice");
        const cplx shift = j.contains("shift") ? complex_from_json(j.at("shift")) : cplx(0.0);
        return potential::lame(n(), lattice_from_json(j.at("lattice")), shift);
    }
    if (v == "tabulated") {
        if (!j.contains("coefficients") || !j.at("coefficients").is_array())
            throw validation_error("config: tabulated potential needs a coefficient array");
        std::vector<cplx> c;
        for (const auto& e : j.at("coefficients")) c.push_back(complex_from_json(e));
        return potential::tabulated(number(j, "period"), c);
    }
    throw validation_error("config: unknown potential variant '" + v + "'");
}

} // namespace singspec::cli
