#pragma once

#include <chrono>
#include <cstdint>

namespace jam {

/// Wall-clock timestamps and durations, in milliseconds.
using Millis = double;

/// Index of a 1/16th-note frame; frame 0 contains the user's first note.
using FrameIndex = std::int64_t;

inline constexpr int kFramesPerBeat = 4;

/// Duration of one frame at the given tempo. Throws std::invalid_argument
/// for a non-positive or non-finite bpm.
Millis frame_duration_ms(double bpm);

/// Maps wall-clock time to frame indices for one session.
///
/// Boundaries belong to the later frame, and frame_at() is computed against
/// time_of_frame() so that the two agree exactly even where the frame
/// duration is not representable.
class FrameClock {
public:
    FrameClock(double bpm, Millis session_start);

    double bpm() const { return bpm_; }
    Millis session_start() const { return start_; }
    Millis frame_duration() const { return frame_ms_; }

    FrameIndex frame_at(Millis now) const;
    Millis time_of_frame(FrameIndex f) const;

private:
    double bpm_;
    Millis start_;
    Millis frame_ms_;
};

/// Monotonic millisecond clock. Simulations substitute VirtualClock.
class MonotonicClock {
public:
    virtual ~MonotonicClock() = default;
    virtual Millis now_ms() const = 0;
};

class SteadyClock final : public MonotonicClock {
public:
    Millis now_ms() const override {
        using namespace std::chrono;
        return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
    }
};

class VirtualClock final : public MonotonicClock {
public:
    explicit VirtualClock(Millis start = 0.0) : now_(start) {}
    Millis now_ms() const override { return now_; }
    void set(Millis t) { now_ = t; }
    void advance(Millis d) { now_ += d; }

private:
    Millis now_;
};

}  // namespace jam
