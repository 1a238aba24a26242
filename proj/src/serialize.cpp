#include "rope/serialize.hpp"

#include <fstream>

#include <json.hpp>

#include "rope/errors.hpp"

namespace rope {

using nlohmann::json;

std::string mdp_to_json(const MdpSpec& spec) {
  const int n = spec.n_states();
  const int d = spec.dim();
  json doc;
  doc["n_states"] = n;
  doc["d"] = d;
  doc["gamma"] = spec.gamma;
  std::vector<double> p_flat, phi_flat, r_flat;
  p_flat.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p_flat.push_back(spec.p(i, j));
  phi_flat.reserve(static_cast<std::size_t>(n) * d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) phi_flat.push_back(spec.phi(i, j));
  r_flat.reserve(n);
  for (int i = 0; i < n; ++i) r_flat.push_back(spec.r(i));
  doc["p"] = p_flat;
  doc["r"] = r_flat;
  doc["phi"] = phi_flat;
  return doc.dump(2);
}

MdpSpec mdp_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ParseError(std::string("mdp json: ") + err.what());
  }
  try {
    const int n = doc.at("n_states").get<int>();
    const int d = doc.at("d").get<int>();
    MdpSpec spec;
    spec.gamma = doc.at("gamma").get<double>();
    const auto p = doc.at("p").get<std::vector<double>>();
    const auto r = doc.at("r").get<std::vector<double>>();
    const auto phi = doc.at("phi").get<std::vector<double>>();
    if (p.size() != static_cast<std::size_t>(n) * n ||
        r.size() != static_cast<std::size_t>(n) ||
        phi.size() != static_cast<std::size_t>(n) * d)
      throw ParseError("mdp json: array sizes inconsistent with n_states/d");
    spec.p.resize(n, n);
    spec.phi.resize(n, d);
    spec.r.resize(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        spec.p(i, j) = p[static_cast<std::size_t>(i) * n + j];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j)
        spec.phi(i, j) = phi[static_cast<std::size_t>(i) * d + j];
    for (int i = 0; i < n; ++i) spec.r(i) = r[i];
    spec.validate();
    return spec;
  } catch (const json::exception& err) {
    throw ParseError(std::string("mdp json: ") + err.what());
  }
}

void save_mdp(const MdpSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << mdp_to_json(spec) << '\n';
}

MdpSpec load_mdp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return mdp_from_json(text);
}

}  // namespace rope
