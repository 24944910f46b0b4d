from services.optimization.params import OptParams
from services.optimization.obstacles import ObstacleIndex, build_obstacle_index, nearest_distance
from services.optimization.costs import collision_cost, cost_gradient, smoothness_cost, total_cost
from services.optimization.optimizer import IterationRecord, OptimizationResult, optimize_trajectory

__all__ = [
    "OptParams",
    "ObstacleIndex",
    "build_obstacle_index",
    "nearest_distance",
    "collision_cost",
    "cost_gradient",
    "smoothness_cost",
    "total_cost",
    "IterationRecord",
    "OptimizationResult",
    "optimize_trajectory",
]
