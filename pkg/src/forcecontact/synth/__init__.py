"""Synthetic sessions and scenes with exact ground truth.

These generators double as the verification oracle for the rest of the
toolkit: contact intervals, clocks, flow fields, and depth maps are all
constructed analytically, and the emitted fixtures use the exact external
file formats of the pipeline.
"""

from .scene import SceneScript, generate_scene, write_scene_fixture
from .session import SessionScript, generate_session, write_session_fixture

__all__ = [
    "SceneScript",
    "SessionScript",
    "generate_scene",
    "generate_session",
    "write_scene_fixture",
    "write_session_fixture",
]
