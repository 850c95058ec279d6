#pragma once

#include <string>

#include <json.hpp>

// Small harbor used across tests: 30x24 cells, coast on top, one wall with a
// two-segment attachment at its end, one control point behind the gap.
inline nlohmann::json small_harbor_json() {
    return nlohmann::json::parse(R"({
      "name": "small_harbor",
      "grid": {"n_cols": 30, "n_rows": 24, "cell_size": 25.0, "water_depth": 8.0,
               "land_polygons": [[[-1, 20.5], [31, 20.5], [31, 25], [-1, 25]]]},
      "existing_structures": [{"name": "wall", "material": "solid_wall", "points": [[6, 20], [6, 10], [14, 10]]}],
      "attachments": [{"position": [14, 10], "base_angle": 0, "segments": 2, "material": "solid_wall"},
                      {"position": [24, 20], "base_angle": 270, "segments": 1, "material": "tetrapod"}],
      "control_points": [[17, 16], [10, 15]],
      "fairway": [[19, 0], [19, 12], [16, 19]],
      "boundary": {"incident_height": 2.0, "wave_direction": 80.0},
      "initialization": {"max_length": 5.0}
    })");
}

inline std::string small_harbor_text() { return small_harbor_json().dump(); }
