#include "corrthermo/config.hpp"

#include <cstdlib>
#include <string>

#include "corrthermo/errors.hpp"

namespace corrthermo {

Config& config() {
    static Config instance;
    return instance;
}

void load_config_from_env() {
    if (const char* raw = std::getenv("CORRTHERMO_MAX_DIM")) {
        try {
            long v = std::stol(raw);
            if (v < 2) throw std::invalid_argument("below 2");
            config().max_total_dimension = static_cast<Eigen::Index>(v);
        } catch (const std::exception&) {
            throw DimensionError(
                "CORRTHERMO_MAX_DIM must be an integer >= 2, got '" +
                std::string(raw) + "'");
        }
    }
}

}  // namespace corrthermo
