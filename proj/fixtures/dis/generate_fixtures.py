#!/usr/bin/env python3
"""Regenerates the golden DIS fixtures with the open-dis-python package.

The C++ codec never runs this script; it only compares its own output
against the committed .bin files and their .json sidecars.

    pip install opendis
    python3 fixtures/dis/generate_fixtures.py
"""
import json
import pathlib
import struct

from opendis.DataOutputStream import DataOutputStream
from opendis import dis7
import io

HERE = pathlib.Path(__file__).resolve().parent
ACTION_DATUM_ID = 100001


def serialize(pdu):
    buf = io.BytesIO()
    pdu.serialize(DataOutputStream(buf))
    data = bytearray(buf.getvalue())
    struct.pack_into(">H", data, 8, len(data))
    return bytes(data)


def v6(pdu, exercise, timestamp, pdu_type, family):
    # open-dis leaves the type and family bytes at zero on serialize.
    pdu.pduType = pdu_type
    pdu.protocolFamily = family
    pdu.protocolVersion = 6
    pdu.exerciseID = exercise
    pdu.timestamp = timestamp
    pdu.pduStatus = 0
    pdu.padding = 0
    return pdu


def entity_state(name, *, exercise, timestamp, site, app, entity, force,
                 location, orientation, velocity, drm, marking,
                 etype=(0, 0, 0, 0, 0, 0, 0), appearance=0, capabilities=0):
    pdu = v6(dis7.EntityStatePdu(), exercise, timestamp, 1, 1)
    pdu.entityID = dis7.EntityID(site, app, entity)
    pdu.forceId = force
    pdu.entityType = dis7.EntityType(*etype)
    pdu.entityLinearVelocity = dis7.Vector3Float(*velocity)
    pdu.entityLocation = dis7.Vector3Double(*location)
    pdu.entityOrientation = dis7.EulerAngles(*orientation)
    pdu.entityAppearance = appearance
    pdu.capabilities = capabilities
    pdu.deadReckoningParameters.deadReckoningAlgorithm = drm
    pdu.marking.characterSet = 1 if marking else 0
    pdu.marking.setString(marking)
    data = serialize(pdu)
    sidecar = {
        "kind": "entity_state",
        "protocol_version": 6,
        "exercise_id": exercise,
        "pdu_type": 1,
        "protocol_family": 1,
        "timestamp": timestamp,
        "length": len(data),
        "entity_id": [site, app, entity],
        "force_id": force,
        "entity_type": list(etype),
        "location": list(location),
        # float32 fields as stored on the wire
        "orientation": [struct.unpack(">f", struct.pack(">f", v))[0] for v in orientation],
        "linear_velocity": [struct.unpack(">f", struct.pack(">f", v))[0] for v in velocity],
        "dead_reckoning_algorithm": drm,
        "marking": marking,
        "appearance": appearance,
        "capabilities": capabilities,
    }
    write(name, data, sidecar)


def action(name, *, exercise, timestamp, origin, target, request_id,
           throttle, pitch, roll, fire):
    pdu = v6(dis7.DataPdu(requestID=request_id), exercise, timestamp, 20, 5)
    pdu.originatingEntityID = dis7.EntityID(*origin)
    pdu.receivingEntityID = dis7.EntityID(*target)
    payload = struct.pack(">fffI", throttle, pitch, roll, fire)
    pdu.variableDatumRecords.append(
        dis7.VariableDatum(ACTION_DATUM_ID, 8 * len(payload), list(payload)))
    data = serialize(pdu)
    sidecar = {
        "kind": "action_data",
        "protocol_version": 6,
        "exercise_id": exercise,
        "pdu_type": 20,
        "protocol_family": 5,
        "timestamp": timestamp,
        "length": len(data),
        "originator": list(origin),
        "entity_id": list(target),
        "request_id": request_id,
        "throttle": struct.unpack(">f", struct.pack(">f", throttle))[0],
        "pitch": struct.unpack(">f", struct.pack(">f", pitch))[0],
        "roll": struct.unpack(">f", struct.pack(">f", roll))[0],
        "fire": fire,
    }
    write(name, data, sidecar)


def write(name, data, sidecar):
    (HERE / f"{name}.bin").write_bytes(data)
    (HERE / f"{name}.json").write_text(json.dumps(sidecar, indent=2) + "\n")
    print(f"{name}: {len(data)} bytes")


if __name__ == "__main__":
    entity_state("entity_state_zero", exercise=0, timestamp=0, site=0, app=0,
                 entity=0, force=0, location=(0.0, 0.0, 0.0),
                 orientation=(0.0, 0.0, 0.0), velocity=(0.0, 0.0, 0.0),
                 drm=0, marking="")
    entity_state("entity_state_f16", exercise=1, timestamp=0x12345678,
                 site=1, app=1, entity=3, force=1,
                 location=(4325139.25, 702416.5, 4625613.125),
                 orientation=(1.25, -0.125, 0.5),
                 velocity=(120.5, -33.25, 210.0), drm=2, marking="BLUE3",
                 etype=(1, 2, 225, 1, 3, 3, 0), appearance=0x00010000,
                 capabilities=0)
    entity_state("entity_state_red", exercise=7, timestamp=0xFFFFFFFE,
                 site=65535, app=2, entity=101, force=2,
                 location=(-6378137.0, 1e-3, -12.5),
                 orientation=(-3.0, 1.5, -0.75),
                 velocity=(-600.0, 0.001, 59.5), drm=4, marking="RED101ABCDE")
    action("action_full_throttle", exercise=1, timestamp=0, origin=(1, 1, 0),
           target=(1, 1, 1), request_id=0, throttle=1.0, pitch=0.0, roll=0.0,
           fire=0)
    action("action_sample", exercise=3, timestamp=0x00ABCDEF,
           origin=(1, 1, 0), target=(1, 2, 101), request_id=42,
           throttle=0.75, pitch=-0.3, roll=0.9, fire=1)
