"""
Deterministic fixture adapters for every model role.

Each fixture answers as a pure function of (request, seed). Randomness comes
from a generator keyed by (seed, role, request hash), so call order never
matters. Scripted faults are matched against the request's subtask index and
attempt number.
"""
import hashlib
import logging
import re
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import orjson

from config.settings import FIXTURE_LIFT_HEIGHT, FIXTURE_PLANNER_CONTEXT
from services.adapters.base import AdapterResponse, AdapterRole, BaseModelAdapter
from services.core.geometry import placement_slot, placement_verdict
from services.core.models import CameraExtrinsics, CameraIntrinsics, Point2D, Point3D, SceneState
from services.errors import AdapterUnavailableError

logger = logging.getLogger(__name__)

UNKNOWN = "unknown"

FAULT_KINDS = ("dropout", "timeout", "schema")

# Coarse commonsense grouping used for skill transfer
CATEGORY_GROUPS: Dict[str, Tuple[str, ...]] = {
    "fruit": ("apple", "banana", "orange", "pear", "lemon", "peach", "grape", "strawberry", "kiwi"),
    "snack": ("box", "cookie", "chip", "cracker", "candy", "bar", "biscuit"),
    "tool": ("hammer", "screwdriver", "wrench", "plier", "pliers", "scissors", "tape"),
    "stationery": ("pen", "pencil", "marker", "eraser", "ruler", "notebook", "stapler"),
    "trash": ("wrapper", "can", "tissue", "peel", "paper", "cup"),
    "toy": ("block", "ball", "car", "doll", "duck"),
}

_FILLER = {"the", "a", "an", "over", "into", "onto", "on", "in", "to", "inside", "above"}
_CLAUSE_SPLIT = re.compile(r",|;|\band\b|\bthen\b")
_WORD = re.compile(r"[a-z0-9]+")


# ---------------------------------------------------------------------
# Determinism helpers
# ---------------------------------------------------------------------
def request_hash(payload: Dict[str, Any]) -> bytes:
    return hashlib.sha256(orjson.dumps(payload, option=orjson.OPT_SORT_KEYS)).digest()


def rng_for(seed: int, role: AdapterRole, payload: Dict[str, Any]) -> np.random.Generator:
    """Generator keyed by (seed, role, request hash)."""
    digest = request_hash(payload)
    words = [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]
    role_index = list(AdapterRole).index(role)
    return np.random.default_rng(np.random.SeedSequence([seed, role_index, *words]))


@dataclass(frozen=True)
class FaultInjection:
    """Scripted failure of one role on one subtask for the listed attempts."""
    role: AdapterRole
    subtask_index: int
    attempts: Tuple[int, ...] = (0,)
    kind: str = "dropout"

    def __post_init__(self):
        if self.kind not in FAULT_KINDS:
            raise ValueError(f"unknown fault kind '{self.kind}', expected one of {FAULT_KINDS}")

    def matches(self, role: AdapterRole, payload: Dict[str, Any]) -> bool:
        return (
            role == self.role
            and payload.get("subtask_index", 0) == self.subtask_index
            and payload.get("attempt", 0) in self.attempts
        )


@dataclass(frozen=True)
class FixtureNoise:
    """Opt-in perturbations; zero means perfect fixtures."""
    track_jitter_px: float = 0.0
    grasp_perturbation: float = 0.0


# ---------------------------------------------------------------------
# Text helpers
# ---------------------------------------------------------------------
def singular(word: str) -> str:
    word = word.lower()
    if word.endswith("es") and len(word) > 3 and re.search(r"(s|x|ch|sh|o)es$", word):
        return word[:-2]
    if word.endswith("s") and not word.endswith("ss") and len(word) > 2:
        return word[:-1]
    return word


def normalize_phrase(text: str) -> str:
    """'the Red_Cubes' -> 'red cube' (fillers dropped, last word singular)."""
    words = [w for w in _WORD.findall(text.lower().replace("_", " ")) if w not in _FILLER]
    if not words:
        return ""
    words[-1] = singular(words[-1])
    return " ".join(words)


def group_of(category: str) -> str:
    key = normalize_phrase(category)
    last = key.split(" ")[-1] if key else key
    for group, members in CATEGORY_GROUPS.items():
        if key in members or last in members:
            return group
    return key


# ---------------------------------------------------------------------
# Base fixture
# ---------------------------------------------------------------------
class FixtureAdapter(BaseModelAdapter):
    """Shared fault handling and RNG plumbing for fixtures."""

    def __init__(self, seed: int = 0, faults: Iterable[FaultInjection] = (), noise: Optional[FixtureNoise] = None):
        self.seed = seed
        self.faults = tuple(f for f in faults if f.role == self.role)
        self.noise = noise or FixtureNoise()

    def invoke(self, payload: Dict[str, Any]) -> AdapterResponse:
        fault = next((f for f in self.faults if f.matches(self.role, payload)), None)
        if fault is not None:
            logger.warning(
                f"Injected {fault.kind} fault: {self.role.value} subtask {fault.subtask_index} "
                f"attempt {payload.get('attempt', 0)}"
            )
            if fault.kind == "timeout":
                raise AdapterUnavailableError(f"{self.role.value} fixture timed out (injected)")
            if fault.kind == "schema":
                return AdapterResponse(payload={"malformed": True}, latency=0.0, attempt_count=1)
        body = self.respond(payload, rng_for(self.seed, self.role, payload), dropout=fault is not None)
        return AdapterResponse(payload=body, latency=0.0, attempt_count=1)

    def respond(self, payload: Dict[str, Any], rng: np.random.Generator, dropout: bool = False) -> Dict[str, Any]:
        raise NotImplementedError


# ---------------------------------------------------------------------
# Planner
# ---------------------------------------------------------------------
class FixturePlanner(FixtureAdapter):
    """
    Rule-based planner.

    ``abstract`` pairs "grasp X" / "release Y" captions into move steps.
    ``unify`` grounds step phrases against the scene summary by id, then by
    category (ties and repeats broken lexicographically), and applies the
    conditioning mode.
    """
    role = AdapterRole.PLANNER

    def __init__(self, seed: int = 0, faults=(), noise=None, context_budget: int = FIXTURE_PLANNER_CONTEXT):
        super().__init__(seed, faults, noise)
        self.context_budget = context_budget

    def respond(self, payload, rng, dropout=False):
        if payload["task"] == "abstract":
            return self._abstract(payload["keyframes"])
        return self._unify(payload)

    # -----------------------------------------------------------------

    def _abstract(self, keyframes: List[Dict[str, Any]]) -> Dict[str, Any]:
        if len(keyframes) > self.context_budget:
            picks = np.unique(np.linspace(0, len(keyframes) - 1, self.context_budget).round().astype(int))
            logger.debug(f"Planner context: sampling {len(picks)} of {len(keyframes)} frames")
            keyframes = [keyframes[i] for i in picks]

        steps: List[Dict[str, Any]] = []
        pending: Optional[Tuple[str, int]] = None
        for kf in keyframes:
            words = kf["label"].strip().split(None, 1)
            if len(words) < 2:
                continue
            verb, phrase = words[0].lower(), normalize_phrase(words[1])
            if verb == "grasp" and phrase:
                if pending is not None:
                    steps.append(self._step(pending[0], UNKNOWN, [pending[1]]))
                pending = (phrase, kf["frame_index"])
            elif verb == "release" and phrase and pending is not None:
                steps.append(self._step(pending[0], phrase, [pending[1], kf["frame_index"]]))
                pending = None
        if pending is not None:
            steps.append(self._step(pending[0], UNKNOWN, [pending[1]]))
        if not steps:
            steps.append(self._step(UNKNOWN, UNKNOWN, [keyframes[0]["frame_index"]]))
        return {"task": "abstract", "steps": steps}

    @staticmethod
    def _step(obj: str, destination: str, frames: List[int]) -> Dict[str, Any]:
        return {"action": "move", "object": obj, "destination": destination, "keyframes": frames}

    # -----------------------------------------------------------------

    def _unify(self, payload: Dict[str, Any]) -> Dict[str, Any]:
        entries = payload["scene"]
        objects = [e for e in entries if e["kind"] == "object"]
        regions = [e for e in entries if e["kind"] == "region"]
        language = payload.get("language") or ""
        mode = payload["mode"]
        unresolved: List[str] = []

        if payload.get("focus"):
            pairs = [(payload["focus"]["obj"], payload["focus"]["loc"])]
        elif mode == "text-only":
            pairs = self._pairs_from_text(language, objects, regions, unresolved)
        else:
            steps = payload["baseline"]["steps"]
            if mode == "skill-transfer":
                pairs = self._transfer(steps, objects, regions, unresolved)
            else:
                missing_locs: List[str] = []
                pairs = self._ground_steps(steps, objects, regions, unresolved, missing_locs)
                target = self._region_in_text(language, regions) if mode == "constrained" else None
                if target is not None:
                    pairs = [(obj, target) for obj, _ in pairs]
                else:
                    unresolved.extend(missing_locs)

        if unresolved:
            return {"task": "unify", "subtasks": [], "unresolved": sorted(set(unresolved))}
        return {"task": "unify", "subtasks": self._subtasks(pairs, objects, regions), "unresolved": []}

    def _resolve_object(self, phrase: str, objects, taken: Dict[str, int]) -> Optional[str]:
        ids = {e["id"] for e in objects}
        if phrase in ids:
            return phrase
        key = normalize_phrase(phrase)
        matches = sorted(e["id"] for e in objects if normalize_phrase(e["category"]) == key)
        if not matches:
            return None
        free = [m for m in matches if m not in taken]
        return free[0] if free else matches[0]

    @staticmethod
    def _resolve_region(phrase: str, regions) -> Optional[str]:
        ids = {e["id"] for e in regions}
        if phrase in ids:
            return phrase
        key = normalize_phrase(phrase)
        matches = sorted(e["id"] for e in regions if normalize_phrase(e["category"]) == key)
        return matches[0] if matches else None

    def _ground_steps(self, steps, objects, regions, missing_objs: List[str],
                      missing_locs: List[str]) -> List[Tuple[str, str]]:
        pairs: List[Tuple[str, str]] = []
        taken: Dict[str, int] = {}
        for step in steps:
            obj = self._resolve_object(step["object"], objects, taken)
            loc = None if step["destination"] == UNKNOWN else self._resolve_region(step["destination"], regions)
            if obj is None:
                missing_objs.append(step["object"])
            if loc is None:
                missing_locs.append(step["destination"])
            if obj is not None:
                taken[obj] = taken.get(obj, 0) + 1
            pairs.append((obj or step["object"], loc or step["destination"]))
        return pairs

    @staticmethod
    def _region_in_text(language: str, regions) -> Optional[str]:
        text = " " + normalize_phrase(language) + " "
        best: Optional[Tuple[int, str]] = None
        for region in sorted(regions, key=lambda e: e["id"]):
            for phrase in (normalize_phrase(region["category"]), normalize_phrase(region["id"])):
                if not phrase:
                    continue
                at = text.find(" " + phrase + " ")
                if at >= 0 and (best is None or at < best[0]):
                    best = (at, region["id"])
        return best[1] if best else None

    def _transfer(self, steps, objects, regions, unresolved: List[str]) -> List[Tuple[str, str]]:
        # baseline group -> destination, in order of first appearance
        destinations: List[str] = []
        group_dest: Dict[str, str] = {}
        for step in steps:
            loc = self._resolve_region(step["destination"], regions)
            if loc is None:
                unresolved.append(step["destination"])
                continue
            group = group_of(step["object"])
            if group not in group_dest:
                group_dest[group] = loc
                if loc not in destinations:
                    destinations.append(loc)
        if not destinations:
            return []

        novel: List[str] = []
        for entry in objects:
            group = group_of(entry["category"])
            if group not in group_dest and group not in novel:
                novel.append(group)
        for i, group in enumerate(novel):
            group_dest[group] = destinations[i % len(destinations)]

        pairs = []
        for entry in objects:
            loc = group_dest.get(group_of(entry["category"]))
            if loc is not None and entry.get("region") != loc:
                pairs.append((entry["id"], loc))
        return pairs

    def _pairs_from_text(self, language: str, objects, regions, unresolved: List[str]) -> List[Tuple[str, str]]:
        pairs: List[Tuple[str, str]] = []
        taken: Dict[str, int] = {}
        for clause in _CLAUSE_SPLIT.split(language):
            text = " " + normalize_phrase(clause) + " "
            if not text.strip():
                continue
            loc = self._region_in_text(clause, regions)
            if loc is None:
                unresolved.append(clause.strip())
                continue
            if " everything " in text or " all " in text:
                pairs.extend((e["id"], loc) for e in objects if e.get("region") != loc)
                continue
            found = None
            for entry in sorted(objects, key=lambda e: e["id"]):
                if f" {normalize_phrase(entry['id'])} " in text:
                    found = entry["id"]
                    break
            if found is None:
                for word in sorted({normalize_phrase(e["category"]) for e in objects}):
                    if word and f" {word} " in text:
                        found = self._resolve_object(word, objects, taken)
                        break
            if found is None:
                unresolved.append(clause.strip())
                continue
            taken[found] = taken.get(found, 0) + 1
            pairs.append((found, loc))
        return pairs

    @staticmethod
    def _subtasks(pairs: Sequence[Tuple[str, str]], objects, regions) -> List[Dict[str, Any]]:
        current = {e["id"]: e.get("region") for e in objects}
        categories = {e["id"]: e["category"] for e in list(objects) + list(regions)}
        subtasks = []
        for obj, loc in pairs:
            precond = []
            if current.get(obj):
                precond.append({"subject": obj, "relation": "on", "object": current[obj]})
            subtasks.append({
                "desc": f"move the {categories.get(obj, obj)} to the {categories.get(loc, loc)}",
                "obj": obj,
                "loc": loc,
                "guide": f"move the {obj} to the {loc}",
                "precond": precond,
            })
            current[obj] = loc
        return subtasks


# ---------------------------------------------------------------------
# Generator / tracker / depth
# ---------------------------------------------------------------------
def _camera(payload: Dict[str, Any]) -> Tuple[CameraIntrinsics, CameraExtrinsics]:
    camera = payload["camera"]
    return CameraIntrinsics.from_dict(camera["intrinsics"]), CameraExtrinsics.from_dict(camera["extrinsics"])


def guide_destination(guide: str, scene: SceneState) -> Optional[str]:
    """First region id mentioned in a guide prompt."""
    hits = []
    for rid in scene.region_ids:
        match = re.search(rf"(?<![\w]){re.escape(rid)}(?![\w])", guide)
        if match:
            hits.append((match.start(), rid))
    return min(hits)[1] if hits else None


class FixtureGenerator(FixtureAdapter):
    """
    Imagines the target lifted along a parabola to a free slot of the guide's destination.

    p(s) = (1 - s) start + s goal + 4 h s (1 - s) z_hat, s = k / (Q - 1). Frames
    carry camera-frame centroids of all objects. A dropout fault removes the
    target from every frame after the first.
    """
    role = AdapterRole.GENERATOR

    def __init__(self, seed: int = 0, faults=(), noise=None, lift_height: float = FIXTURE_LIFT_HEIGHT):
        super().__init__(seed, faults, noise)
        self.lift_height = lift_height

    def respond(self, payload, rng, dropout=False):
        scene = SceneState.from_dict(payload["scene"])
        _, extrinsics = _camera(payload)
        target = payload["target"]
        obj = scene.get_object(target)
        count = payload["frames"]

        world_path: Optional[np.ndarray] = None
        if obj is not None:
            start = obj.position.as_array()
            destination = guide_destination(payload["guide"], scene)
            goal = placement_slot(scene, target, destination).as_array() if destination else start
            s = np.linspace(0.0, 1.0, count)
            lift = 4.0 * self.lift_height * s * (1.0 - s)
            world_path = (1.0 - s)[:, None] * start + s[:, None] * goal
            world_path[:, 2] += lift

        frames = []
        for k in range(count):
            objects = {}
            for other in scene.objects:
                if other.id == target:
                    continue
                objects[other.id] = extrinsics.to_camera(other.position).to_list()
            if world_path is not None and not (dropout and k > 0):
                objects[target] = extrinsics.to_camera(Point3D.from_seq(world_path[k])).to_list()
            frames.append({"objects": objects})
        return {"frames": frames}


class FixtureTracker(FixtureAdapter):
    """Projects the target centroid; optional jitter on interior frames."""
    role = AdapterRole.TRACKER

    def respond(self, payload, rng, dropout=False):
        intrinsics = CameraIntrinsics.from_dict(payload["intrinsics"])
        target = payload["object_id"]
        frames = payload["frames"]
        sigma = self.noise.track_jitter_px
        tracks: List[Optional[List[float]]] = []
        for k, frame in enumerate(frames):
            xyz = frame["objects"].get(target)
            if xyz is None or dropout or xyz[2] <= 0:
                tracks.append(None)
                continue
            z = xyz[2]
            u = intrinsics.fx * xyz[0] / z + intrinsics.cx
            v = intrinsics.fy * xyz[1] / z + intrinsics.cy
            if sigma > 0 and 0 < k < len(frames) - 1:
                du, dv = rng.normal(0.0, sigma, size=2)
                u, v = u + du, v + dv
            if not intrinsics.contains(Point2D(u, v)):
                tracks.append(None)
                continue
            tracks.append([float(u), float(v)])
        return {"tracks": tracks}


class FixtureDepth(FixtureAdapter):
    """
    Sparse depth: a 3x3 patch at every object's projection and at every
    requested pixel, valued with the depth of the nearest projected object.
    """
    role = AdapterRole.DEPTH

    def respond(self, payload, rng, dropout=False):
        intrinsics = CameraIntrinsics.from_dict(payload["intrinsics"])
        if dropout:
            return {"frames": [{} for _ in payload["frames"]]}
        out = []
        for k, frame in enumerate(payload["frames"]):
            projected = []
            for xyz in frame["objects"].values():
                if xyz[2] > 0:
                    projected.append((intrinsics.fx * xyz[0] / xyz[2] + intrinsics.cx,
                                      intrinsics.fy * xyz[1] / xyz[2] + intrinsics.cy, xyz[2]))
            depth: Dict[str, float] = {}
            centers = [(u, v, z) for u, v, z in projected]
            if k < len(payload["pixels"]) and projected:
                u, v = payload["pixels"][k]
                nearest = min(projected, key=lambda p: (p[0] - u) ** 2 + (p[1] - v) ** 2)
                centers.append((u, v, nearest[2]))
            for u, v, z in centers:
                u0, v0 = int(np.floor(u + 0.5)), int(np.floor(v + 0.5))
                for du in (-1, 0, 1):
                    for dv in (-1, 0, 1):
                        uu, vv = u0 + du, v0 + dv
                        if 0 <= uu < intrinsics.width and 0 <= vv < intrinsics.height:
                            depth[f"{uu},{vv}"] = float(z)
            out.append(depth)
        return {"frames": out}


# ---------------------------------------------------------------------
# Selector / verifier
# ---------------------------------------------------------------------
class FixtureSelector(FixtureAdapter):
    """
    Grasp choice by max stability (lowest id on ties); geometric verdicts.

    A dropout fault turns a passing verdict into a rejection.
    """
    role = AdapterRole.SELECTOR

    def respond(self, payload, rng, dropout=False):
        if payload["task"] == "select_grasp":
            best = min(payload["candidates"], key=lambda c: (-c["stability"], c["id"]))
            return {"task": "select_grasp", "selected_id": best["id"]}

        scene = SceneState.from_dict(payload["scene"])
        subtask = payload["subtask"]
        passed, reason = placement_verdict(scene, subtask["obj"], subtask["loc"], payload["tolerance"])
        if dropout and passed:
            # injected false negative
            return {"task": "verify", "passed": False, "reason": "out-of-region"}
        return {"task": "verify", "passed": passed, "reason": reason}
