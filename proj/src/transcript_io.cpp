#include "bb84/transcript_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include <fmt/format.h>
#include <json.hpp>

namespace bb84 {

void write_transcript(std::ostream& out, const SessionTranscript& transcript) {
  for (const auto& e : transcript.events()) {
    const nlohmann::json line{{"seq", e.seq},
                              {"actor", std::string(to_string(e.actor))},
                              {"kind", std::string(to_string(e.kind))},
                              {"payload", to_hex(e.payload)}};
    out << line.dump() << '\n';
  }
}

SessionTranscript read_transcript(std::istream& in) {
  SessionTranscript t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto actor = parse_actor(j.at("actor").get<std::string>());
      const auto kind = parse_event_kind(j.at("kind").get<std::string>());
      if (!actor || !kind) throw std::invalid_argument("unknown actor or kind");
      t.push({j.at("seq").get<std::uint64_t>(), *actor, *kind, from_hex(j.at("payload").get<std::string>())});
    } catch (const std::exception& ex) {
      throw std::runtime_error(fmt::format("transcript line {}: {}", line_no, ex.what()));
    }
  }
  return t;
}

void save_transcript(const std::filesystem::path& path, const SessionTranscript& transcript) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  write_transcript(out, transcript);
  if (!out) throw std::runtime_error(fmt::format("error writing {}", path.string()));
}

SessionTranscript load_transcript(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot read {}", path.string()));
  return read_transcript(in);
}

}  // namespace bb84
