# Lines, one per probe distribution
hutchinson_line = {"linestyle": "-", "linewidth": 1.5, "color": "b", "marker": "o", "markersize": 3}
gaussian_line = {"linestyle": "-", "linewidth": 1.5, "color": "r", "marker": "s", "markersize": 3}
unit_line = {"linestyle": "-", "linewidth": 1.5, "color": "g", "marker": "^", "markersize": 3}
unit_noreplace_line = {"linestyle": "--", "linewidth": 1.5, "color": "m", "marker": "v", "markersize": 3}

# Analytic curves and references
necessary_line = {"linestyle": "-", "linewidth": 2, "color": "k"}
dotted_black_line = {"linestyle": ":", "linewidth": 1, "color": "k"}
dotted_red_line = {"linestyle": ":", "linewidth": 1, "color": "r"}

METHOD_LINES = {
    "hutchinson": hutchinson_line,
    "gaussian": gaussian_line,
    "unit": unit_line,
    "unit-noreplace": unit_noreplace_line,
}
