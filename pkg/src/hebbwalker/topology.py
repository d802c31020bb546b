"""Robot topology presets: leg/joint counts and the derived network sizes."""

from dataclasses import dataclass

from .errors import ConfigError


@dataclass(frozen=True)
class Topology:
    """Leg/joint layout of a walker and the network sizes derived from it.

    Observations are [joint angles | foot contacts | roll, pitch, yaw], so the
    observation size is joints + legs + 3; actions are one target per joint.
    """

    name: str
    num_legs: int
    joints_per_leg: int
    hidden_sizes: tuple = (64, 32)
    lstm_hidden: int = 60

    def __post_init__(self):
        if self.num_legs < 1 or self.joints_per_leg < 1:
            raise ConfigError("topology needs at least one leg and one joint per leg")

    @property
    def joint_count(self):
        return self.num_legs * self.joints_per_leg

    @property
    def obs_size(self):
        return self.joint_count + self.num_legs + 3

    @property
    def action_size(self):
        return self.joint_count

    @property
    def ff_sizes(self):
        """Layer widths of the feedforward (and Hebbian) controller."""
        return (self.obs_size, *self.hidden_sizes, self.action_size)


# Six legs x three joints: 27 observations (18 + 6 + 3), 18 outputs.
BEETLE = Topology("beetle", num_legs=6, joints_per_leg=3)

# Four legs x four joints: 23 observations (16 + 4 + 3), 16 outputs.
GECKO = Topology("gecko", num_legs=4, joints_per_leg=4)

PRESETS = {"beetle": BEETLE, "gecko": GECKO}


def get_topology(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(
            f"unknown topology preset {name!r}; available: {sorted(PRESETS)}"
        ) from None
