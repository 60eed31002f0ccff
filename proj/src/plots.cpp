#include "bevkit/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "bevkit/io.hpp"

namespace bevkit {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kMargin = 40.0;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

const char* class_color(ClassLabel label) { return label == ClassLabel::Vehicle ? "#1f77b4" : "#d62728"; }

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    // Padded so a flat series still maps to a finite scale.
    void finish() {
        if (!std::isfinite(lo)) {
            lo = 0.0;
            hi = 1.0;
        }
        if (hi - lo < 1e-9) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
};

std::string header(double w, double h) {
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           num(w) + "\" height=\"" + num(h) + "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\">\n" +
           "<rect x=\"0\" y=\"0\" width=\"" + num(w) + "\" height=\"" + num(h) + "\" fill=\"white\"/>\n";
}

std::string text(double x, double y, const std::string& s) {
    return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-family=\"sans-serif\" font-size=\"12\">" + s +
           "</text>\n";
}

std::string frame_rect(double x, double y, double w, double h) {
    return "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(h) +
           "\" fill=\"none\" stroke=\"#888\"/>\n";
}

// Time series panel occupying [top, top + h).
std::string panel(const std::vector<double>& t, const std::vector<double>& v, double top, double h,
                  const std::string& title, const char* color) {
    Range tx;
    Range vy;
    for (double x : t) tx.add(x);
    for (double y : v) vy.add(y);
    tx.finish();
    vy.finish();
    const double pw = kWidth - 2 * kMargin;
    const double ph = h - 2 * kMargin;
    std::string s = frame_rect(kMargin, top + kMargin, pw, ph);
    s += text(kMargin, top + kMargin - 8, title + " [" + num(vy.lo) + ", " + num(vy.hi) + "]");
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double px = kMargin + (t[i] - tx.lo) / (tx.hi - tx.lo) * pw;
        const double py = top + kMargin + (1.0 - (v[i] - vy.lo) / (vy.hi - vy.lo)) * ph;
        if (i) s += ' ';
        s += num(px) + "," + num(py);
    }
    s += "\"/>\n";
    return s;
}

}  // namespace

std::string trajectory_svg(const std::vector<TrackKinematics>& tracks) {
    std::string s = header(kWidth, kHeight);
    s += text(kMargin, kMargin - 12, "trajectories (x right, y up)");
    Range rx;
    Range ry;
    for (const auto& t : tracks) {
        for (const auto& p : t.smoothed) {
            rx.add(p.x);
            ry.add(p.y);
        }
    }
    rx.finish();
    ry.finish();
    // One scale for both axes so shapes are not distorted.
    const double pw = kWidth - 2 * kMargin;
    const double ph = kHeight - 2 * kMargin;
    const double scale = std::min(pw / (rx.hi - rx.lo), ph / (ry.hi - ry.lo));
    s += frame_rect(kMargin, kMargin, pw, ph);
    for (const auto& t : tracks) {
        s += "<polyline data-track=\"" + std::to_string(t.track_id) + "\" fill=\"none\" stroke=\"" +
             class_color(t.label) + "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < t.smoothed.size(); ++i) {
            const double px = kMargin + (t.smoothed[i].x - rx.lo) * scale;
            const double py = kMargin + ph - (t.smoothed[i].y - ry.lo) * scale;
            if (i) s += ' ';
            s += num(px) + "," + num(py);
        }
        s += "\"/>\n";
    }
    s += "</svg>\n";
    return s;
}

std::string kinematics_svg(const TrackKinematics& track, double frame_rate_hz) {
    std::vector<double> t;
    for (auto f : track.frame_ids) t.push_back(static_cast<double>(f) / frame_rate_hz);
    std::string s = header(kWidth, kHeight);
    const std::string name = "track " + std::to_string(track.track_id) + " " + std::string(to_string(track.label));
    s += panel(t, track.speed, 0.0, kHeight / 2, name + " speed m/s", class_color(track.label));
    s += panel(t, track.accel, kHeight / 2, kHeight / 2, name + " acceleration m/s2", "#2ca02c");
    s += "</svg>\n";
    return s;
}

void emit_plots(const std::vector<TrackKinematics>& tracks, double frame_rate_hz, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_text_file(dir / "trajectories.svg", trajectory_svg(tracks));
    for (const auto& t : tracks) {
        char name[32];
        std::snprintf(name, sizeof name, "track_%04d.svg", t.track_id);
        write_text_file(dir / name, kinematics_svg(t, frame_rate_hz));
    }
}

}  // namespace bevkit
