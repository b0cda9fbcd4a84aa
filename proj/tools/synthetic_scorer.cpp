// synthetic_scorer: scorer/1 server backed by one of the synthetic scorers.
//
//   synthetic_scorer green-mean
//   synthetic_scorer constant:4.2
//   synthetic_scorer region-box:255,0,255
//   synthetic_scorer raw:<value>      replies with the value unclipped
//
// Reads requests on stdin and answers on stdout until EOF.

#include <iostream>
#include <string>

#include "streetsafe/process_scorer.hpp"
#include "streetsafe/scorer.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: synthetic_scorer <kind>\n";
    return 2;
  }
  const std::string kind = argv[1];
  try {
    if (kind.starts_with("raw:")) {
      // Misbehaving server for client tests: echoes ids with a fixed score.
      const double value = std::stod(kind.substr(4));
      std::string line;
      while (std::getline(std::cin, line)) {
        const auto req = nlohmann::json::parse(line, nullptr, false);
        const std::string id = req.is_object() ? req.value("id", "") : "";
        std::cout << nlohmann::json{{"id", id}, {"score", value}}.dump() << '\n' << std::flush;
      }
      return 0;
    }
    auto scorer = streetsafe::scorer::synthetic_scorer(kind);
    std::ios::sync_with_stdio(false);
    streetsafe::scorer::serve(std::cin, std::cout, *scorer);
  } catch (const std::exception& e) {
    std::cerr << "synthetic_scorer: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
