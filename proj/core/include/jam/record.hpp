#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "jam/clock.hpp"
#include "jam/settings.hpp"
#include "jam/tokens.hpp"
#include "jam/wire.hpp"

namespace jam {

/// Settings in force for requests targeting [from_frame, to_frame).
struct SettingsSpan {
    FrameIndex from_frame = 0;
    FrameIndex to_frame = 0;
    SessionSettings settings;
    bool operator==(const SettingsSpan&) const = default;
};

struct RequestLogEntry {
    FrameIndex target_frame = 0;
    Millis send_ms = 0.0;
    std::optional<Millis> recv_ms;  // unset if no response was applied
    Millis gen_ms = 0.0;
    bool operator==(const RequestLogEntry&) const = default;
};

/// Downloadable account of a finished session (.jam).
struct SessionRecord {
    std::string session_id;
    Millis session_start = 0.0;
    std::vector<SettingsSpan> settings;
    std::vector<MelodyToken> melody;
    std::vector<ChordToken> chords;  // as played
    std::optional<WarmStart> warm_start;
    std::vector<RequestLogEntry> requests;
    std::vector<FrameIndex> underruns;

    std::size_t frames() const { return melody.size(); }
    bool operator==(const SessionRecord&) const = default;
};

/// Same key=value document format as the wire protocol, without framing.
std::string serialize_record(const SessionRecord& record);
/// Throws KvError on malformed input.
SessionRecord parse_record(std::string_view text);

}  // namespace jam
