#include "jam/clock.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace jam {

Millis frame_duration_ms(double bpm) {
    if (!(bpm > 0.0) || !std::isfinite(bpm)) {
        throw std::invalid_argument("bpm must be positive and finite, got " + std::to_string(bpm));
    }
    return 60000.0 / (bpm * kFramesPerBeat);
}

FrameClock::FrameClock(double bpm, Millis session_start)
    : bpm_(bpm), start_(session_start), frame_ms_(frame_duration_ms(bpm)) {
    if (!std::isfinite(session_start)) {
        throw std::invalid_argument("session start must be finite");
    }
}

Millis FrameClock::time_of_frame(FrameIndex f) const {
    return start_ + static_cast<double>(f) * frame_ms_;
}

FrameIndex FrameClock::frame_at(Millis now) const {
    if (now < start_) {
        throw std::invalid_argument("timestamp precedes session start");
    }
    auto f = static_cast<FrameIndex>(std::floor((now - start_) / frame_ms_));
    // Rounding in the division can land one frame off near a boundary.
    while (f > 0 && time_of_frame(f) > now) --f;
    while (time_of_frame(f + 1) <= now) ++f;
    return f;
}

}  // namespace jam
