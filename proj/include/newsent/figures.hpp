#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace newsent {

// A finished chart as a resolution-independent display list. The SVG output
// is the primary artifact; png() rasterizes the same drawing at 2x scale
// with a built-in bitmap font (labels fold to the glyphs it carries).
class Figure {
public:
    std::string svg() const;
    std::vector<std::uint8_t> png() const;

    double width() const { return width_; }
    double height() const { return height_; }

    struct Color {
        std::uint8_t r = 0, g = 0, b = 0;
    };
    enum class Anchor { start, middle, end };

private:
    struct Rect {
        double x, y, w, h;
        Color fill;
    };
    struct Line {
        double x1, y1, x2, y2;
        Color color;
        double width;
    };
    struct Text {
        double x, y;
        std::string s;
        double size;
        Color color;
        Anchor anchor;
    };

    double width_ = 0, height_ = 0;
    std::vector<Rect> rects_;
    std::vector<Line> lines_;
    std::vector<Text> texts_;

    friend class FigureBuilder;
};

struct BarItem {
    std::string label;
    double value = 0;
};

// Horizontal bars, longest scale wins; made for n-gram frequency tables.
Figure bar_chart(const std::string& title, const std::vector<BarItem>& items);

// Two series side by side per category.
struct GroupedBars {
    std::vector<std::string> categories;
    std::string name_a, name_b;
    std::vector<double> a, b;
};
Figure grouped_bar_chart(const std::string& title, const GroupedBars& data);

struct LineSeries {
    std::string name;
    std::vector<double> values; // aligned with x_labels
};
Figure line_chart(const std::string& title, const std::vector<std::string>& x_labels,
                  const std::vector<LineSeries>& series);

// Square matrix with a diverging blue-white-red scale over [-1, 1].
Figure heatmap(const std::string& title, const std::vector<std::string>& labels,
               const std::vector<std::vector<double>>& values);

// Bars against the left axis, a line against an independent right axis.
struct DualAxisData {
    std::vector<std::string> x_labels;
    std::string bars_name;
    std::vector<double> bars;
    std::string line_name;
    std::vector<double> line;
};
Figure dual_axis_chart(const std::string& title, const DualAxisData& data);

// Truecolor PNG from 8-bit RGB rows, zlib-compressed.
std::vector<std::uint8_t> encode_png(std::size_t width, std::size_t height,
                                     const std::vector<std::uint8_t>& rgb);

} // namespace newsent
