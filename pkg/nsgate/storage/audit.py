import json
from datetime import datetime, timezone
from typing import Any, Dict, Optional

from .db import DB


def record_audit(db: Optional[DB], actor: str, action: str, payload: Dict[str, Any]) -> None:
    """Append to the audit table; a disabled ledger (``db is None``) is a no-op."""
    if db is None:
        return
    db.insert(
        "audits",
        {
            "ts": datetime.now(timezone.utc).isoformat(),
            "actor": actor,
            "action": action,
            "payload": json.dumps(payload, sort_keys=True, default=str),
        },
    )
