#include "pgraft/trajectory_io.hpp"

#include <ostream>
#include <sstream>

#include <json.hpp>

#include "pgraft/wire.hpp"

namespace pgraft {

void write_trajectory_jsonl(std::ostream& out, const Trajectory& trajectory) {
    for (std::size_t s = 0; s < trajectory.states.size(); ++s) {
        const State& state = trajectory.states[s];
        nlohmann::ordered_json record;
        record["step"] = state.step;
        record["state"] = state.data;
        if (s < trajectory.schedule.size()) {
            record["condition"] = to_string(trajectory.schedule[s]);
        } else {
            record["condition"] = nullptr;
        }
        if (auto score = trajectory.similarity.at(state.step)) {
            record["score"] = *score;
        }
        out << record.dump() << '\n';
    }
}

std::string trajectory_jsonl(const Trajectory& trajectory) {
    std::ostringstream out;
    write_trajectory_jsonl(out, trajectory);
    return out.str();
}

void write_states_f32(std::ostream& out, const Trajectory& trajectory) {
    for (const State& state : trajectory.states) {
        const auto bytes = wire::pack_f32(state.data);
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    }
}

}  // namespace pgraft
