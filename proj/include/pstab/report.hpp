#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "pstab/integrator.hpp"
#include "pstab/lie_calculus.hpp"
#include "pstab/stability_toolkit.hpp"

namespace pstab {

inline constexpr int kReportSchemaVersion = 1;

using ordered_json = nlohmann::ordered_json;

/// Non-finite values serialize as null.
ordered_json to_json(const Vec& v);
ordered_json to_json(const RankReport& r);
ordered_json to_json(const ProofConstants& k);
ordered_json to_json(const Intermediates& c);
ordered_json to_json(const EpsilonBounds& b);
ordered_json to_json(const ContractionReport& r);
ordered_json to_json(const RateFit& f);
ordered_json to_json(const CertificationReport& r);

/// Writes `content` to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace pstab
