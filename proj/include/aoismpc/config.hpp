#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "aoismpc/aoi.hpp"
#include "aoismpc/model.hpp"
#include "aoismpc/synthesis.hpp"

namespace aoismpc {

/// Everything a run needs, as read from one JSON document.
struct RunConfig {
    int horizon = 0;
    std::optional<ProblemSpec> spec;  // absent when only the channel was requested
    std::optional<AoiChain> chain;
    SynthesisOptions options;
    std::uint64_t config_hash = 0;  // FNV-1a of the raw text
};

/// Parses a config document. With require_problem false only `horizon` and
/// `channel` are read. Throws ConfigError naming the offending field (dotted
/// path) or the line/column of a syntax error.
RunConfig parse_config(const std::string& text, bool require_problem = true);
RunConfig load_config(const std::string& path, bool require_problem = true);

std::uint64_t fnv1a(const std::string& text);
std::string hex64(std::uint64_t v);

}  // namespace aoismpc
