"""LVEF from echocardiogram LV segmentations."""
