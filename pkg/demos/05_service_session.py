"""Drive the placement service through a full worker session in-process.

The same flow works over the wire with `tablesim serve` plus the browser UI;
here the FastAPI test client keeps the demo self-contained.
"""

from pathlib import Path

from fastapi.testclient import TestClient

from tablesim import build_demo_catalog
from tablesim.placement import SceneConfig, revalidate_config
from tablesim.service import create_app

out = Path("demo_out/service")
out.mkdir(parents=True, exist_ok=True)

catalog = build_demo_catalog(out / "catalog", seed=0)
app = create_app(catalog, out / "store", seed=42)
client = TestClient(app)

session = client.post("/session", json={"variant": "vanilla"}).json()
sid = session["session_id"]
print(f"session {sid}: table {session['table']['id']}, "
      f"{len(session['categories'])} candidate categories")
print(f"BEV extents (m): {[round(v, 2) for v in session['bev_image_extents']]}")

png = client.get(f"/session/{sid}/bev.png")
(out / "bev.png").write_bytes(png.content)
print(f"saved height-shaded BEV image ({len(png.content)} bytes)")

category = session["categories"][0]
instances = client.get(f"/session/{sid}/instances",
                       params={"category": category}).json()["instances"]
asset = instances[0]["asset_id"]
print(f"picking '{asset}' from category '{category}'")

placed = client.post(f"/session/{sid}/place",
                     json={"asset_id": asset, "bev_xy": [0.1, 0.05],
                           "yaw": 0.4}).json()
print(f"placed at z={placed['transform']['translation'][2]:.4f} "
      f"(height calibrated server-side)")

# fine-tune: nudge it and spin it, as the toolbar would
tuned = client.patch(f"/session/{sid}/placement/{placed['pid']}",
                     json={"dx": 0.08, "yaw": 1.2}).json()
print(f"fine-tuned: yaw {tuned['transform']['yaw']:.2f}, "
      f"footprint {[round(v, 3) for v in tuned['footprint']]}")

# a conflicting second object is rejected and nothing changes
conflict = client.post(f"/session/{sid}/place",
                       json={"asset_id": asset,
                             "bev_xy": [0.18, 0.05]})
print(f"conflicting place -> {conflict.status_code} "
      f"{conflict.json().get('error', '')}")

done = client.post(f"/session/{sid}/submit").json()
print(f"submitted config {done['config_id']} -> {done['path']}")

progress = client.get("/admin/progress").json()
print(f"progress: {progress}")

# anything in the store re-validates cold
config = SceneConfig.load(done["path"])
revalidate_config(config, catalog)
print("stored config re-validates (contact + collision freedom)")
