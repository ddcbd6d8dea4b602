#pragma once

#include <filesystem>
#include <iosfwd>

#include "bb84/transcript.hpp"

namespace bb84 {

/// One JSON object per line: {"actor", "kind", "payload" (hex), "seq"}.
void write_transcript(std::ostream& out, const SessionTranscript& transcript);
SessionTranscript read_transcript(std::istream& in);

void save_transcript(const std::filesystem::path& path, const SessionTranscript& transcript);
SessionTranscript load_transcript(const std::filesystem::path& path);

}  // namespace bb84
