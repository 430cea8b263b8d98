#pragma once

#include "singspec/elliptic.hpp"
#include "singspec/potentials.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace singspec::cli {

using json = nlohmann::json;

// "1.5", "0.7+0.9i", "-2i", "i"
cplx parse_complex(const std::string& s);
// Comma-separated lists.
std::vector<double> parse_reals(const std::string& s);
std::vector<int> parse_ints(const std::string& s);
std::vector<cplx> parse_complexes(const std::string& s);

// A complex in JSON: a number or a two-element [re, im] array.
cplx complex_from_json(const json& j);
json complex_to_json(cplx z);

json read_json_file(const std::string& path);

// {omega_re, omega_im, omega2_re, omega2_im}
elliptic_lattice lattice_from_json(const json& j);
json lattice_to_json(const elliptic_lattice& L);

// {variant, n, k, lattice, shift, period, coefficients}; variant is one of
// zero, rational, trig, sinh, lame, tabulated. `lattice` is an inline
// object or a path to a lattice file.
potential potential_from_json(const json& j);

} // namespace singspec::cli
