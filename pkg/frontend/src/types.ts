/** Shared wire types for the relay REST/SSE API. */

export type Role = 'authority' | 'civilian';

export interface Gps {
  lat: number;
  lon: number;
}

/** A crime-log entry as the relay returns it. Civilian responses omit
 * clip_ref and scores entirely. */
export interface CrimeEntry {
  event_id: string;
  camera_id: string;
  gps: Gps;
  timestamp_ms: number;
  label: string;
  confidence: number;
  received_at_ms: number;
  clip_ref?: string | null;
  scores?: {
    spatial: number[];
    temporal: number[];
    fused: number[];
  };
  suppressed?: boolean;
}

export interface BroadcastNotice {
  broadcast_id: string;
  message: string;
  created_at_ms: number;
  recipients?: string[];
}

export interface ThresholdNotice {
  threshold: number;
  set_by: string;
}

export type AlertKind = 'crime' | 'broadcast' | 'config';

export interface AlertMessage {
  id: number;
  kind: AlertKind;
  data: CrimeEntry | BroadcastNotice | ThresholdNotice;
}

export const CLASS_NAMES = ['theft', 'assault', 'shooting', 'no_action'] as const;
