"""popa: seated posture-pattern continuous authentication.

Pipeline: 16-channel chair-pressure frames (real or synthetic) are windowed
into 10-second decision units, classified against an enrolled profile, and
rejections or vacancy de-authenticate the session. The evaluation harness
reproduces the identification (repeated stratified CV) and cross-session
permanence studies on synthetic populations.
"""

__version__ = "0.1.0"
