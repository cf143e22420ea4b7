#include "jam/settings.hpp"

#include <cmath>

namespace jam {

std::optional<std::string> SessionSettings::validate() const {
    if (!(bpm > 0.0) || !std::isfinite(bpm)) return "bpm must be positive and finite";
    if (beats_per_measure <= 0) return "beats_per_measure must be positive";
    if (silence_beats < 0) return "silence_beats must be non-negative";
    if (lookahead_beats <= 0) return "lookahead_beats must be positive";
    if (commit_beats < 0) return "commit_beats must be non-negative";
    if (commit_beats > lookahead_beats) return "commit_beats must not exceed lookahead_beats";
    if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
        return "temperature must be non-negative and finite";
    }
    if (model_id.empty()) return "model_id must not be empty";
    return std::nullopt;
}

}  // namespace jam
