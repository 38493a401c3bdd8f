#pragma once

#include <nlohmann/json.hpp>

#include <fstream>
#include <string>
#include <vector>

#include "exhird/errors.hpp"
#include "exhird/text/document.hpp"
#include "exhird/text/tokenizer.hpp"

namespace exhird::text {

/// One JSON object per line: {"title": str, "abstract": str, "keyphrases": str}
/// where keyphrases are ';'-separated. A JSON array of strings is accepted
/// for "keyphrases" as well. Blank lines are skipped.
inline std::vector<RawSample> read_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus " + path);
  std::vector<RawSample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = path + ":" + std::to_string(lineno);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("title") || !j.contains("abstract"))
      throw DataError(where + ": expected an object with \"title\" and \"abstract\"");
    RawSample s;
    try {
      s.title = j.at("title").get<std::string>();
      s.abstract = j.at("abstract").get<std::string>();
      if (j.contains("keyphrases")) {
        const auto& kp = j.at("keyphrases");
        if (kp.is_array()) {
          for (const auto& p : kp) s.keyphrases.push_back(p.get<std::string>());
        } else {
          for (auto& p : split_keyphrases(kp.get<std::string>()))
            if (!p.empty()) s.keyphrases.push_back(std::move(p));
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where + ": " + e.what());
    }
    out.push_back(std::move(s));
  }
  return out;
}

inline void write_corpus(const std::string& path, const std::vector<RawSample>& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write corpus " + path);
  for (const auto& s : corpus) {
    std::string kps;
    for (std::size_t i = 0; i < s.keyphrases.size(); ++i) {
      if (i) kps += ";";
      kps += s.keyphrases[i];
    }
    nlohmann::json j{{"title", s.title}, {"abstract", s.abstract}, {"keyphrases", kps}};
    out << j.dump() << '\n';
  }
}

}  // namespace exhird::text
