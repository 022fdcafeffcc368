"""Configuration constants shared by all processaction modules.

Attributes
----------
START_ACTIVITY : str
    Label of the last activity of the empty prefix.
START_CLUSTER : int
    Cluster id of the empty prefix. The k-means model never outputs it.
END_ACTION : str
    Pseudo-action that ends an episode in a state that also has
    continuations.
AGENT : str
    Owner tag of the activities controlled by the recommender.
ENVIRONMENT : str
    Owner tag of all other activities.
interest_rate : float
    Share of the requested amount earned when an offer is accepted.
labor_cost : float
    Cost of one hour of working time (currency per hour).
idle_threshold : float
    Maximum working time (hours) charged for a single event when durations
    are derived from timestamps.
n_clusters : int
    Default number of k-means clusters.
step_threshold : int
    Default occurrence threshold n_t of the step scaling function.
smooth_lambda : float
    Default λ of the smooth scaling function.
gamma : float
    Default discount factor.
max_episode_len : int
    Default cap on the number of steps of a training episode.
stall_limit : int
    Number of consecutive agent activities without environment response
    after which a simulated case is stopped.
sim_traces : int
    Default number of simulated cases per policy.

"""

START_ACTIVITY: str = "<START>"
START_CLUSTER: int = -1
END_ACTION: str = "<END>"

AGENT: str = "agent"
ENVIRONMENT: str = "environment"
owners: list[str] = [AGENT, ENVIRONMENT]

interest_rate: float = 0.15
labor_cost: float = 36.0  # unit: currency per hour
idle_threshold: float = 8.0  # unit: hours

n_clusters: int = 100
kmeans_max_iter: int = 300
kmeans_tol: float = 1e-4

step_threshold: int = 50
smooth_lambda: float = 50.0
gamma: float = 0.99
max_episode_len: int = 200
epsilon_start: float = 1.0
epsilon_end: float = 0.05
epsilon_horizon: float = 0.8  # share of the episodes after which epsilon_end is reached

stall_limit: int = 50
sim_traces: int = 5000
significance_level: float = 0.05
