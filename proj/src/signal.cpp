#include "gazeprompt/signal.hpp"

#include <algorithm>
#include <cmath>

#include "gazeprompt/error.hpp"

namespace gazeprompt {

SampleFilter::SampleFilter(const EngineConfig& cfg, const ScreenGeometry& geom)
    : half_window_((cfg.median_window - 1) / 2),
      period_us_(cfg.nominal_period_us()),
      blink_merge_us_(cfg.blink_merge_us),
      width_(geom.width_px),
      height_(geom.height_px) {
    const double px_per_deg = degrees_to_px(1.0, Axis::horizontal, geom);
    max_px_per_us_ = px_per_deg * cfg.max_velocity_deg_per_s / 1e6;
}

std::vector<FilteredSample> SampleFilter::push(const GazeSample& raw) {
    if (last_t_ && raw.t <= *last_t_)
        throw Error(ErrorCode::stream_order, "sample timestamp " + std::to_string(raw.t) +
                                                 " does not follow " + std::to_string(*last_t_));
    last_t_ = raw.t;
    ++received_;

    std::vector<FilteredSample> out;
    const bool usable = raw.valid && std::isfinite(raw.x) && std::isfinite(raw.y);
    if (!usable) {
        ++invalid_;
        if (last_valid_t_) gap_us_ = raw.t - *last_valid_t_;
        return out;
    }

    if (last_valid_t_) {
        const Micros gap = raw.t - *last_valid_t_ - period_us_;
        if (gap > blink_merge_us_) {
            finish_segment(out);
            break_pending_ = true;
        }
    }
    last_valid_t_ = raw.t;
    gap_us_ = 0;

    GazeSample s = raw;
    s.x = std::clamp(s.x, 0.0, width_);
    s.y = std::clamp(s.y, 0.0, height_);
    segment_.push_back(s);

    while (next_emit_ + half_window_ < segment_.size()) emit_position(next_emit_++, out);

    // keep only what later medians still reference
    const std::size_t keep_from = next_emit_ > static_cast<std::size_t>(half_window_)
                                      ? next_emit_ - half_window_
                                      : 0;
    if (keep_from > 0) {
        segment_.erase(segment_.begin(), segment_.begin() + static_cast<std::ptrdiff_t>(keep_from));
        next_emit_ -= keep_from;
    }
    return out;
}

std::vector<FilteredSample> SampleFilter::flush() {
    std::vector<FilteredSample> out;
    finish_segment(out);
    return out;
}

void SampleFilter::finish_segment(std::vector<FilteredSample>& out) {
    while (next_emit_ < segment_.size()) emit_position(next_emit_++, out);
    segment_.clear();
    next_emit_ = 0;
}

void SampleFilter::emit_position(std::size_t pos, std::vector<FilteredSample>& out) {
    const auto last = static_cast<std::ptrdiff_t>(segment_.size()) - 1;
    // The window may reach before the retained history only at a segment start,
    // where edge replication applies.
    std::vector<double> xs, ys;
    xs.reserve(2 * half_window_ + 1);
    ys.reserve(2 * half_window_ + 1);
    for (int k = -half_window_; k <= half_window_; ++k) {
        const auto idx = std::clamp(static_cast<std::ptrdiff_t>(pos) + k, std::ptrdiff_t{0}, last);
        xs.push_back(segment_[idx].x);
        ys.push_back(segment_[idx].y);
    }
    const auto mid = xs.size() / 2;
    std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
    std::nth_element(ys.begin(), ys.begin() + mid, ys.end());

    GazeSample s = segment_[pos];
    s.x = xs[mid];
    s.y = ys[mid];

    if (last_emitted_) {
        const double dt = static_cast<double>(s.t - last_emitted_->t);
        const double dist = std::hypot(s.x - last_emitted_->x, s.y - last_emitted_->y);
        if (dist > max_px_per_us_ * dt) {
            ++outliers_;
            return;
        }
    }
    last_emitted_ = s;
    ++emitted_;
    out.push_back({s, break_pending_});
    break_pending_ = false;
}

void SampleFilter::translate(double dy) {
    for (auto& s : segment_) s.y += dy;
    if (last_emitted_) last_emitted_->y += dy;
}

FixationDetector::FixationDetector(const EngineConfig& cfg)
    : max_dispersion_(cfg.fixation_dispersion_px), min_duration_(cfg.min_fixation_duration_us) {}

double FixationDetector::open_dispersion() const {
    return count_ == 0 ? 0.0 : (max_x_ - min_x_) + (max_y_ - min_y_);
}

void FixationDetector::start(const GazeSample& s) {
    count_ = 1;
    sum_x_ = s.x;
    sum_y_ = s.y;
    min_x_ = max_x_ = s.x;
    min_y_ = max_y_ = s.y;
    onset_ = s.t;
    last_t_ = s.t;
}

std::optional<Fixation> FixationDetector::push(const FilteredSample& fs) {
    ++fed_;
    const GazeSample& s = fs.sample;
    std::optional<Fixation> closed;
    if (count_ > 0 && fs.gap_break) closed = close();

    if (count_ == 0) {
        start(s);
        return closed;
    }

    const double dispersion = (std::max(max_x_, s.x) - std::min(min_x_, s.x)) +
                              (std::max(max_y_, s.y) - std::min(min_y_, s.y));
    if (dispersion <= max_dispersion_) {
        ++count_;
        sum_x_ += s.x;
        sum_y_ += s.y;
        min_x_ = std::min(min_x_, s.x);
        max_x_ = std::max(max_x_, s.x);
        min_y_ = std::min(min_y_, s.y);
        max_y_ = std::max(max_y_, s.y);
        last_t_ = s.t;
        return closed;
    }
    closed = close();
    start(s);
    return closed;
}

std::optional<Fixation> FixationDetector::flush() { return count_ > 0 ? close() : std::nullopt; }

std::optional<Fixation> FixationDetector::close() {
    const int n = count_;
    count_ = 0;
    const Micros duration = last_t_ - onset_;
    if (n < 2 || duration < min_duration_) {
        discarded_ += static_cast<std::size_t>(n);
        return std::nullopt;
    }
    in_fixations_ += static_cast<std::size_t>(n);
    Fixation f;
    f.cx = sum_x_ / n;
    f.cy = sum_y_ / n;
    f.onset = onset_;
    f.duration = duration;
    f.sample_count = n;
    f.layout_version = layout_version_;
    return f;
}

void FixationDetector::translate(double dy) {
    if (count_ == 0) return;
    sum_y_ += dy * count_;
    min_y_ += dy;
    max_y_ += dy;
}

SignalSummary detect_fixations(std::span<const GazeSample> samples, const EngineConfig& cfg,
                               const ScreenGeometry& geom) {
    SampleFilter filter(cfg, geom);
    FixationDetector detector(cfg);
    SignalSummary out;
    auto feed = [&](const std::vector<FilteredSample>& batch) {
        for (const auto& fs : batch)
            if (auto f = detector.push(fs)) out.fixations.push_back(*f);
    };
    for (const auto& s : samples) feed(filter.push(s));
    feed(filter.flush());
    if (auto f = detector.flush()) out.fixations.push_back(*f);
    out.total = filter.received();
    out.invalid = filter.invalid();
    out.outliers = filter.outliers();
    out.in_fixations = detector.in_fixations();
    out.discarded = detector.discarded();
    return out;
}

}  // namespace gazeprompt
