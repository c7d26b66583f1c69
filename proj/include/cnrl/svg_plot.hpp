/*
 * Copyright 2026 The cnrl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <optional>
#include <string>
#include <vector>

namespace cnrl {

struct ScatterPoint
{
    double x = 0;
    double y = 0;
    bool target = true;
    std::optional<double> color_value;
};

struct ScatterOptions
{
    int width = 640;
    int height = 480;
    std::string title;
    std::string color_label; ///< legend caption of the color scale
};

/// Hex color "#rrggbb" on a perceptually ordered sequential scale, t in [0, 1].
std::string sequential_color(double t);

/**
 * Static SVG scatter of a joint embedding. Target points are circles and
 * background points squares, each carrying class="marker"; the two shape
 * legend entries carry class="legend-entry". When any point has a color value a
 * sequential color scale with min/max labels is drawn as well. Output depends
 * only on the inputs.
 */
std::string render_scatter_svg(const std::vector<ScatterPoint>& points, const ScatterOptions& options = {});

} // namespace cnrl
