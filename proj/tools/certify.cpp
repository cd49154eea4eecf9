// certify: decide hyperbolicity of a multiple HNN extension of a free group
// from a JSON description of its endomorphisms.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "hnncert/certify.hpp"

int main(int argc, char** argv) {
  CLI::App app{"certify hyperbolicity of F_n *_{phi_1^N,...,phi_r^N}"};

  std::string                input, output, format = "json";
  std::optional<int>         pullback_cap, disjointness_cap, expansion_cap;
  std::optional<std::uint64_t> seed;
  bool                       diagnostics = false, lenient = false;

  app.add_option("--input", input, "config JSON")->required();
  app.add_option("--output", output, "write the report here instead of stdout");
  app.add_option("--format", format, "json or text")->check(CLI::IsMember({"json", "text"}));
  app.add_option("--pullback-cap", pullback_cap)->check(CLI::PositiveNumber);
  app.add_option("--disjointness-cap", disjointness_cap)->check(CLI::PositiveNumber);
  app.add_option("--expansion-cap", expansion_cap)->check(CLI::PositiveNumber);
  app.add_option("--seed", seed);
  app.add_flag("--diagnostics", diagnostics, "run the lamination probes");
  app.add_flag("--lenient", lenient, "warn on unknown config fields instead of failing");

  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  std::ifstream in(input, std::ios::binary);
  if (!in) {
    std::cerr << "certify: cannot read " << input << "\n";
    return 1;
  }
  std::stringstream buf;
  buf << in.rdbuf();

  hnncert::Certificate cert;
  try {
    auto cfg = hnncert::parse_config(buf.str(), lenient);
    if (pullback_cap) {
      cfg.caps.pullback = *pullback_cap;
    }
    if (disjointness_cap) {
      cfg.caps.disjointness = *disjointness_cap;
    }
    if (expansion_cap) {
      cfg.caps.expansion = *expansion_cap;
    }
    if (seed) {
      cfg.seed = *seed;
    }
    cfg.diagnostics = cfg.diagnostics || diagnostics;
    for (auto const& w : cfg.warnings) {
      std::cerr << "certify: warning: " << w << "\n";
    }
    cert = hnncert::certify(cfg);
  } catch (hnncert::InputError const& e) {
    std::cerr << "certify: " << input << ": " << e.what() << "\n";
    return 1;
  }

  std::string report = format == "json" ? hnncert::certificate_json(cert).dump(2) + "\n" : hnncert::emit_text(cert);
  if (output.empty()) {
    std::cout << report;
  } else {
    std::ofstream out(output, std::ios::binary);
    out << report;
    if (!out) {
      std::cerr << "certify: cannot write " << output << "\n";
      return 1;
    }
  }
  return hnncert::exit_code(cert.decision);
}
