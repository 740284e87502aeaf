"""Session state: saved implants plus the one being planned.

Save keeps the current implant for this session and clears the slot;
Export writes every implant (saved and current) to STL without touching
the session, so an exported current implant can still be saved or
readjusted afterwards.
"""

import json
from dataclasses import dataclass, replace

from .errors import EmptySession, NothingToSave
from .implant import Implant, implant_from_dict, implant_to_dict
from .mesh import merge_meshes
from .stl import save_stl

SESSION_VERSION = 1


@dataclass(frozen=True)
class Session:
    saved: tuple = ()
    current: Implant = None
    mesh_ref: str = ""

    def implants(self):
        """Saved implants plus the unsaved current one, in order."""
        return list(self.saved) + ([self.current] if self.current is not None else [])


def set_current(session: Session, implant: Implant) -> Session:
    return replace(session, current=implant)


def save_current(session: Session) -> Session:
    """Append the in-progress implant to the saved list and clear it."""
    if session.current is None:
        raise NothingToSave("no implant in progress")
    return replace(session, saved=session.saved + (session.current,), current=None)


def export_filename(k: int, implant: Implant) -> str:
    return f"implant_{k}_{implant.model_id}.stl"


def export_all(session: Session, mode: str = "combined"):
    """Serialize every implant to STL.

    mode "combined": one facet-soup STL of all implants.
    mode "per_implant": list of (filename, bytes) pairs.
    The session itself is not modified.
    """
    implants = session.implants()
    if not implants:
        raise EmptySession("nothing to export")
    if mode == "combined":
        return save_stl(merge_meshes([imp.mesh for imp in implants]), "binary")
    if mode == "per_implant":
        return [
            (export_filename(k, imp), save_stl(imp.mesh, "binary"))
            for k, imp in enumerate(implants)
        ]
    raise ValueError(f"unknown export mode {mode!r}")


def session_to_dict(session: Session) -> dict:
    return {
        "session_version": SESSION_VERSION,
        "mesh_ref": session.mesh_ref,
        "saved": [implant_to_dict(i) for i in session.saved],
        "current": implant_to_dict(session.current) if session.current else None,
    }


def session_from_dict(doc: dict) -> Session:
    return Session(
        saved=tuple(implant_from_dict(d) for d in doc["saved"]),
        current=implant_from_dict(doc["current"]) if doc.get("current") else None,
        mesh_ref=doc.get("mesh_ref", ""),
    )


def session_to_json(session: Session) -> bytes:
    return json.dumps(session_to_dict(session)).encode()


def session_from_json(data: bytes) -> Session:
    return session_from_dict(json.loads(data))
