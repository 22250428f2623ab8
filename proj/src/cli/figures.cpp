#include "newsent/figures.hpp"

#include "newsent/util.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>

namespace newsent {

namespace {

using Color = Figure::Color;

constexpr Color kBlack{20, 20, 20};
constexpr Color kGrey{150, 150, 150};
constexpr Color kLightGrey{225, 225, 225};

const Color kPalette[] = {
    {68, 114, 196}, {237, 125, 49}, {112, 173, 71}, {191, 144, 0},
    {91, 155, 213}, {165, 105, 189}, {70, 70, 70},
};

std::string hex_color(Color c) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", c.r, c.g, c.b);
    return buf;
}

// Axis tick label; %.4g keeps counts exact and trims float noise.
std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

} // namespace

class FigureBuilder {
public:
    FigureBuilder(double w, double h) {
        f_.width_ = w;
        f_.height_ = h;
    }

    void rect(double x, double y, double w, double h, Color fill) {
        f_.rects_.push_back({x, y, w, h, fill});
    }
    void line(double x1, double y1, double x2, double y2, Color c, double width = 1.0) {
        f_.lines_.push_back({x1, y1, x2, y2, c, width});
    }
    void text(double x, double y, std::string s, double size, Color c,
              Figure::Anchor anchor = Figure::Anchor::start) {
        f_.texts_.push_back({x, y, std::move(s), size, c, anchor});
    }
    void title(const std::string& s) {
        text(f_.width_ / 2, 26, s, 15, kBlack, Figure::Anchor::middle);
    }

    Figure take() { return std::move(f_); }

private:
    Figure f_;
};

// ---- SVG backend -------------------------------------------------------------

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace

std::string Figure::svg() const {
    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt_double(width_) +
           "\" height=\"" + fmt_double(height_) + "\" viewBox=\"0 0 " + fmt_double(width_) + " " +
           fmt_double(height_) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    for (const auto& r : rects_)
        out += "<rect x=\"" + fmt_double(r.x) + "\" y=\"" + fmt_double(r.y) + "\" width=\"" +
               fmt_double(r.w) + "\" height=\"" + fmt_double(r.h) + "\" fill=\"" +
               hex_color(r.fill) + "\"/>\n";
    for (const auto& l : lines_)
        out += "<line x1=\"" + fmt_double(l.x1) + "\" y1=\"" + fmt_double(l.y1) + "\" x2=\"" +
               fmt_double(l.x2) + "\" y2=\"" + fmt_double(l.y2) + "\" stroke=\"" +
               hex_color(l.color) + "\" stroke-width=\"" + fmt_double(l.width) + "\"/>\n";
    for (const auto& t : texts_) {
        const char* anchor = t.anchor == Anchor::middle ? "middle"
                             : t.anchor == Anchor::end  ? "end"
                                                        : "start";
        out += "<text x=\"" + fmt_double(t.x) + "\" y=\"" + fmt_double(t.y) + "\" font-size=\"" +
               fmt_double(t.size) + "\" fill=\"" + hex_color(t.color) +
               "\" font-family=\"Helvetica, Arial, sans-serif\" text-anchor=\"" + anchor + "\">" +
               xml_escape(t.s) + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

// ---- raster backend ------------------------------------------------------------

namespace {

// 5x7 bitmap font, uppercase plus the punctuation the charts use. Each byte
// is one row, bit 4 leftmost.
struct Glyph {
    char c;
    std::uint8_t rows[7];
};

const Glyph kFont[] = {
    {' ', {0, 0, 0, 0, 0, 0, 0}},
    {'-', {0x00, 0x00, 0x00, 0x0E, 0x00, 0x00, 0x00}},
    {'_', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x1F}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
    {',', {0x00, 0x00, 0x00, 0x00, 0x0C, 0x04, 0x08}},
    {':', {0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00}},
    {'%', {0x19, 0x1A, 0x02, 0x04, 0x08, 0x0B, 0x13}},
    {'(', {0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02}},
    {')', {0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08}},
    {'/', {0x01, 0x02, 0x02, 0x04, 0x08, 0x08, 0x10}},
    {'+', {0x00, 0x04, 0x04, 0x1F, 0x04, 0x04, 0x00}},
    {'=', {0x00, 0x00, 0x1F, 0x00, 0x1F, 0x00, 0x00}},
    {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
    {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
    {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
    {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
    {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
    {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
    {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
    {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
    {'A', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
    {'B', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
    {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}},
    {'D', {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C}},
    {'E', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}},
    {'F', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
    {'G', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}},
    {'H', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
    {'I', {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'J', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C}},
    {'K', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}},
    {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
    {'M', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}},
    {'N', {0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11}},
    {'O', {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
    {'P', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
    {'Q', {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}},
    {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
    {'S', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}},
    {'T', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
    {'U', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
    {'V', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
    {'W', {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A}},
    {'X', {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
    {'Y', {0x11, 0x11, 0x0A, 0x04, 0x04, 0x04, 0x04}},
    {'Z', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}},
};

const Glyph* find_glyph(char c) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    for (const auto& g : kFont)
        if (g.c == c) return &g;
    return nullptr;
}

class Raster {
public:
    Raster(std::size_t w, std::size_t h) : w_(w), h_(h), px_(w * h * 3, 255) {}

    void set(long x, long y, Color c) {
        if (x < 0 || y < 0 || x >= long(w_) || y >= long(h_)) return;
        std::size_t i = (std::size_t(y) * w_ + std::size_t(x)) * 3;
        px_[i] = c.r;
        px_[i + 1] = c.g;
        px_[i + 2] = c.b;
    }

    void fill_rect(double x, double y, double w, double h, Color c) {
        long x0 = std::lround(x), y0 = std::lround(y), x1 = std::lround(x + w), y1 = std::lround(y + h);
        for (long yy = y0; yy < y1; ++yy)
            for (long xx = x0; xx < x1; ++xx) set(xx, yy, c);
    }

    void draw_line(double x1, double y1, double x2, double y2, Color c, double width) {
        double dx = x2 - x1, dy = y2 - y1;
        double len = std::hypot(dx, dy);
        int steps = std::max(1, int(std::ceil(len)));
        long r = std::max(0L, std::lround(width / 2.0));
        for (int s = 0; s <= steps; ++s) {
            double t = double(s) / steps;
            long cx = std::lround(x1 + t * dx), cy = std::lround(y1 + t * dy);
            for (long oy = -r; oy <= r; ++oy)
                for (long ox = -r; ox <= r; ++ox) set(cx + ox, cy + oy, c);
        }
    }

    // size is the glyph height in raster pixels (before the 7-row grid).
    void draw_text(double x, double y, const std::string& s, double size, Color c, int anchor) {
        long cell = std::max(1L, std::lround(size / 7.0));
        long advance = 6 * cell;
        long width = advance * long(s.size());
        long x0 = std::lround(x) - (anchor == 1 ? width / 2 : anchor == 2 ? width : 0);
        long y0 = std::lround(y) - 7 * cell; // y is the baseline
        for (char ch : s) {
            if (const Glyph* g = find_glyph(ch)) {
                for (int row = 0; row < 7; ++row)
                    for (int bit = 0; bit < 5; ++bit)
                        if (g->rows[row] & (1 << (4 - bit)))
                            for (long sy = 0; sy < cell; ++sy)
                                for (long sx = 0; sx < cell; ++sx)
                                    set(x0 + bit * cell + sx, y0 + row * cell + sy, c);
            }
            x0 += advance;
        }
    }

    const std::vector<std::uint8_t>& pixels() const { return px_; }
    std::size_t width() const { return w_; }
    std::size_t height() const { return h_; }

private:
    std::size_t w_, h_;
    std::vector<std::uint8_t> px_;
};

void push_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(std::uint8_t(v >> 24));
    out.push_back(std::uint8_t(v >> 16));
    out.push_back(std::uint8_t(v >> 8));
    out.push_back(std::uint8_t(v));
}

void push_chunk(std::vector<std::uint8_t>& out, const char type[4],
                const std::vector<std::uint8_t>& data) {
    push_be32(out, std::uint32_t(data.size()));
    std::size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    std::uint32_t crc = std::uint32_t(
        ::crc32(0, out.data() + crc_start, uInt(out.size() - crc_start)));
    push_be32(out, crc);
}

} // namespace

std::vector<std::uint8_t> encode_png(std::size_t width, std::size_t height,
                                     const std::vector<std::uint8_t>& rgb) {
    if (rgb.size() != width * height * 3) fail_data("encode_png: buffer does not match dimensions");

    std::vector<std::uint8_t> raw;
    raw.reserve(rgb.size() + height);
    for (std::size_t y = 0; y < height; ++y) {
        raw.push_back(0); // filter: none
        raw.insert(raw.end(), rgb.begin() + long(y * width * 3),
                   rgb.begin() + long((y + 1) * width * 3));
    }

    uLongf bound = ::compressBound(uLong(raw.size()));
    std::vector<std::uint8_t> compressed(bound);
    if (::compress2(compressed.data(), &bound, raw.data(), uLong(raw.size()), 9) != Z_OK)
        fail_env("encode_png: deflate failed");
    compressed.resize(bound);

    std::vector<std::uint8_t> out{0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
    std::vector<std::uint8_t> ihdr;
    push_be32(ihdr, std::uint32_t(width));
    push_be32(ihdr, std::uint32_t(height));
    ihdr.push_back(8); // bit depth
    ihdr.push_back(2); // truecolor
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    push_chunk(out, "IHDR", ihdr);
    push_chunk(out, "IDAT", compressed);
    push_chunk(out, "IEND", {});
    return out;
}

std::vector<std::uint8_t> Figure::png() const {
    constexpr double kScale = 2.0;
    Raster r(std::size_t(width_ * kScale), std::size_t(height_ * kScale));
    for (const auto& q : rects_)
        r.fill_rect(q.x * kScale, q.y * kScale, q.w * kScale, q.h * kScale, q.fill);
    for (const auto& l : lines_)
        r.draw_line(l.x1 * kScale, l.y1 * kScale, l.x2 * kScale, l.y2 * kScale, l.color,
                    l.width * kScale);
    for (const auto& t : texts_)
        r.draw_text(t.x * kScale, t.y * kScale, t.s, t.size * kScale, t.color,
                    t.anchor == Anchor::middle ? 1 : t.anchor == Anchor::end ? 2 : 0);
    return encode_png(r.width(), r.height(), r.pixels());
}

// ---- charts -------------------------------------------------------------------

Figure bar_chart(const std::string& title, const std::vector<BarItem>& items) {
    const double left = 250, right = 70, top = 50, row = 26;
    double width = 880;
    double height = top + row * double(items.size()) + 20;
    FigureBuilder b(width, std::max(height, 120.0));
    b.title(title);

    double vmax = 0;
    for (const auto& it : items) vmax = std::max(vmax, it.value);
    if (vmax <= 0) vmax = 1;
    double span = width - left - right;

    for (std::size_t i = 0; i < items.size(); ++i) {
        double y = top + row * double(i);
        b.text(left - 8, y + 16, items[i].label, 11, kBlack, Figure::Anchor::end);
        double w = span * items[i].value / vmax;
        b.rect(left, y + 5, w, row - 10, kPalette[0]);
        b.text(left + w + 6, y + 16, tick_label(items[i].value), 10, kGrey);
    }
    b.line(left, top - 6, left, top + row * double(items.size()), kBlack, 1);
    return b.take();
}

Figure grouped_bar_chart(const std::string& title, const GroupedBars& data) {
    std::size_t n = data.categories.size();
    const double slot = 80, left = 70, right = 40, top = 60, bottom = 70;
    double width = std::max(640.0, left + right + slot * double(n));
    double height = 430;
    FigureBuilder b(width, height);
    b.title(title);

    double vmax = 1;
    for (double v : data.a) vmax = std::max(vmax, v);
    for (double v : data.b) vmax = std::max(vmax, v);
    double plot_h = height - top - bottom;
    double base_y = height - bottom;

    for (int g = 0; g <= 4; ++g) {
        double v = vmax * g / 4.0;
        double y = base_y - plot_h * g / 4.0;
        b.line(left, y, width - right, y, kLightGrey, 1);
        b.text(left - 6, y + 4, tick_label(v), 9, kGrey, Figure::Anchor::end);
    }

    for (std::size_t i = 0; i < n; ++i) {
        double cx = left + slot * (double(i) + 0.5);
        double av = i < data.a.size() ? data.a[i] : 0;
        double bv = i < data.b.size() ? data.b[i] : 0;
        b.rect(cx - 26, base_y - plot_h * av / vmax, 24, plot_h * av / vmax, kPalette[0]);
        b.rect(cx + 2, base_y - plot_h * bv / vmax, 24, plot_h * bv / vmax, kPalette[1]);
        double ly = base_y + (i % 2 ? 34 : 18); // staggered rows keep labels apart
        b.text(cx, ly, data.categories[i], 10, kBlack, Figure::Anchor::middle);
    }
    b.line(left, base_y, width - right, base_y, kBlack, 1);

    b.rect(width - right - 200, 36, 12, 12, kPalette[0]);
    b.text(width - right - 184, 46, data.name_a, 10, kBlack);
    b.rect(width - right - 100, 36, 12, 12, kPalette[1]);
    b.text(width - right - 84, 46, data.name_b, 10, kBlack);
    return b.take();
}

Figure line_chart(const std::string& title, const std::vector<std::string>& x_labels,
                  const std::vector<LineSeries>& series) {
    std::size_t n = x_labels.size();
    const double left = 70, right = 170, top = 56, bottom = 64;
    double width = std::max(700.0, left + right + 48.0 * double(n));
    double height = 410;
    FigureBuilder b(width, height);
    b.title(title);

    double vmin = 0, vmax = 0;
    for (const auto& s : series)
        for (double v : s.values) {
            vmin = std::min(vmin, v);
            vmax = std::max(vmax, v);
        }
    if (vmax == vmin) vmax = vmin + 1;
    double plot_w = width - left - right, plot_h = height - top - bottom;
    auto xpos = [&](std::size_t i) {
        return n < 2 ? left + plot_w / 2 : left + plot_w * double(i) / double(n - 1);
    };
    auto ypos = [&](double v) { return top + plot_h * (vmax - v) / (vmax - vmin); };

    for (int g = 0; g <= 4; ++g) {
        double v = vmin + (vmax - vmin) * g / 4.0;
        b.line(left, ypos(v), width - right, ypos(v), kLightGrey, 1);
        b.text(left - 6, ypos(v) + 4, tick_label(v), 9, kGrey, Figure::Anchor::end);
    }
    if (vmin < 0 && vmax > 0) b.line(left, ypos(0), width - right, ypos(0), kGrey, 1);

    std::size_t step = n > 14 ? (n + 13) / 14 : 1;
    for (std::size_t i = 0; i < n; i += step)
        b.text(xpos(i), height - bottom + 18, x_labels[i], 9, kBlack, Figure::Anchor::middle);

    for (std::size_t k = 0; k < series.size(); ++k) {
        Color c = kPalette[k % std::size(kPalette)];
        const auto& vals = series[k].values;
        for (std::size_t i = 0; i + 1 < vals.size() && i + 1 < n; ++i)
            b.line(xpos(i), ypos(vals[i]), xpos(i + 1), ypos(vals[i + 1]), c, 2);
        for (std::size_t i = 0; i < vals.size() && i < n; ++i)
            b.rect(xpos(i) - 2.5, ypos(vals[i]) - 2.5, 5, 5, c);
        b.rect(width - right + 14, top + 18 * double(k), 12, 4, c);
        b.text(width - right + 30, top + 18 * double(k) + 6, series[k].name, 10, kBlack);
    }
    b.line(left, top, left, height - bottom, kBlack, 1);
    b.line(left, height - bottom, width - right, height - bottom, kBlack, 1);
    return b.take();
}

Figure heatmap(const std::string& title, const std::vector<std::string>& labels,
               const std::vector<std::vector<double>>& values) {
    std::size_t n = labels.size();
    const double cell = 48, left = 130, top = 88;
    double width = left + cell * double(n) + 40;
    double height = top + cell * double(n) + 30;
    FigureBuilder b(width, height);
    b.title(title);

    auto cell_color = [](double v) {
        v = std::clamp(v, -1.0, 1.0);
        if (v >= 0) {
            auto g = std::uint8_t(std::lround(255 * (1 - v)));
            return Color{255, g, g};
        }
        auto g = std::uint8_t(std::lround(255 * (1 + v)));
        return Color{g, g, 255};
    };

    for (std::size_t j = 0; j < n; ++j) {
        double ly = top - (j % 2 ? 26 : 10); // two staggered header rows
        b.text(left + cell * (double(j) + 0.5), ly, labels[j], 9, kBlack, Figure::Anchor::middle);
    }
    for (std::size_t i = 0; i < n; ++i) {
        b.text(left - 8, top + cell * (double(i) + 0.6), labels[i], 9, kBlack, Figure::Anchor::end);
        for (std::size_t j = 0; j < n && j < values[i].size(); ++j) {
            double v = values[i][j];
            double x = left + cell * double(j), y = top + cell * double(i);
            b.rect(x, y, cell - 2, cell - 2, cell_color(v));
            char buf[16];
            std::snprintf(buf, sizeof(buf), "%.2f", v);
            Color tc = std::fabs(v) > 0.55 ? Color{255, 255, 255} : kBlack;
            b.text(x + (cell - 2) / 2, y + cell / 2 + 3, buf, 9, tc, Figure::Anchor::middle);
        }
    }
    return b.take();
}

Figure dual_axis_chart(const std::string& title, const DualAxisData& data) {
    std::size_t n = data.x_labels.size();
    const double left = 80, right = 90, top = 60, bottom = 64;
    double width = std::max(680.0, left + right + 60.0 * double(n));
    double height = 430;
    FigureBuilder b(width, height);
    b.title(title);

    double bmax = 1, lmax = 1;
    for (double v : data.bars) bmax = std::max(bmax, v);
    for (double v : data.line) lmax = std::max(lmax, v);
    double plot_h = height - top - bottom;
    double base_y = height - bottom;
    auto xpos = [&](std::size_t i) {
        return left + (width - left - right) * (double(i) + 0.5) / double(n);
    };

    for (int g = 0; g <= 4; ++g) {
        double y = base_y - plot_h * g / 4.0;
        b.line(left, y, width - right, y, kLightGrey, 1);
        b.text(left - 6, y + 4, tick_label(bmax * g / 4.0), 9, kPalette[0], Figure::Anchor::end);
        b.text(width - right + 6, y + 4, tick_label(lmax * g / 4.0), 9, kPalette[1]);
    }

    for (std::size_t i = 0; i < n; ++i) {
        double v = i < data.bars.size() ? data.bars[i] : 0;
        b.rect(xpos(i) - 16, base_y - plot_h * v / bmax, 32, plot_h * v / bmax, kPalette[0]);
        b.text(xpos(i), base_y + 18, data.x_labels[i], 9, kBlack, Figure::Anchor::middle);
    }
    for (std::size_t i = 0; i + 1 < data.line.size() && i + 1 < n; ++i)
        b.line(xpos(i), base_y - plot_h * data.line[i] / lmax, xpos(i + 1),
               base_y - plot_h * data.line[i + 1] / lmax, kPalette[1], 2.5);
    for (std::size_t i = 0; i < data.line.size() && i < n; ++i)
        b.rect(xpos(i) - 3, base_y - plot_h * data.line[i] / lmax - 3, 6, 6, kPalette[1]);

    b.line(left, base_y, width - right, base_y, kBlack, 1);
    b.rect(left, 36, 12, 12, kPalette[0]);
    b.text(left + 16, 46, data.bars_name, 10, kBlack);
    b.rect(left + 170, 36, 12, 12, kPalette[1]);
    b.text(left + 186, 46, data.line_name, 10, kBlack);
    return b.take();
}

} // namespace newsent
